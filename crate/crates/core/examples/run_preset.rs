//! A shortened built-in preset through the full pipeline, then the report
//! table over its output.

use layerfront::config::preset;
use layerfront::run::{report_table, run};

fn main() -> layerfront::Result<()> {
    let mut cfg = preset("ex1d-dae")?;
    cfg.train.iterations = 300;
    let out = std::env::temp_dir().join("layerfront-run-example");
    let res = run(&cfg, &out)?;
    println!("artifacts in {}", out.display());
    print!("{}", report_table(&[out]));
    println!("digest {}", res.manifest.digest);
    Ok(())
}
