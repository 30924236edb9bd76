//! Hand-rolled forward-jet and reverse pass for the MLP.
//!
//! Propagates the value, first derivatives with respect to the leading
//! `slots` inputs and diagonal second derivatives for the leading `second`
//! inputs, then pulls adjoints on all of those back to the parameters.

/// Scratch buffers for one network; reused across points.
#[derive(Debug, Clone)]
pub struct Trace {
    sizes: Vec<usize>,
    slots: usize,
    second: usize,
    /// Inputs of each layer: value, slot derivatives, second derivatives.
    a: Vec<Vec<f64>>,
    a1: Vec<Vec<f64>>,
    a2: Vec<Vec<f64>>,
    /// Pre-activation derivatives of each hidden layer.
    z1: Vec<Vec<f64>>,
    z2: Vec<Vec<f64>>,
    out: Vec<f64>,
    // adjoint buffers
    g: Vec<f64>,
    g1: Vec<f64>,
    g2: Vec<f64>,
    h: Vec<f64>,
    h1: Vec<f64>,
    h2: Vec<f64>,
}

impl Trace {
    pub fn new(sizes: &[usize], slots: usize, second: usize) -> Self {
        assert!(second <= slots && slots <= sizes[0]);
        let l = sizes.len();
        let widest = *sizes.iter().max().unwrap();
        Trace {
            sizes: sizes.to_vec(),
            slots,
            second,
            a: (0..l).map(|i| vec![0.0; sizes[i]]).collect(),
            a1: (0..l).map(|i| vec![0.0; sizes[i] * slots]).collect(),
            a2: (0..l).map(|i| vec![0.0; sizes[i] * second]).collect(),
            z1: (0..l).map(|i| vec![0.0; sizes[i] * slots]).collect(),
            z2: (0..l).map(|i| vec![0.0; sizes[i] * second]).collect(),
            out: vec![0.0; 1 + slots + second],
            g: vec![0.0; widest],
            g1: vec![0.0; widest * slots],
            g2: vec![0.0; widest * second],
            h: vec![0.0; widest],
            h1: vec![0.0; widest * slots],
            h2: vec![0.0; widest * second],
        }
    }

    pub fn slots(&self) -> usize {
        self.slots
    }

    /// Output `[value, d1[0..slots], d2[0..second]]`.
    pub fn forward(&mut self, theta: &[f64], input: &[f64]) -> &[f64] {
        let (slots, second) = (self.slots, self.second);
        let n0 = self.sizes[0];
        self.a[0].copy_from_slice(input);
        self.a1[0].fill(0.0);
        for s in 0..slots {
            self.a1[0][s * n0 + s] = 1.0;
        }
        self.a2[0].fill(0.0);
        let layers = self.sizes.len() - 1;
        let mut off = 0;
        for l in 0..layers {
            let (ni, no) = (self.sizes[l], self.sizes[l + 1]);
            let w = &theta[off..off + ni * no];
            let b = &theta[off + ni * no..off + ni * no + no];
            off += ni * no + no;
            let (lo, hi) = self.a.split_at_mut(l + 1);
            let (lo1, hi1) = self.a1.split_at_mut(l + 1);
            let (lo2, hi2) = self.a2.split_at_mut(l + 1);
            let (x, x1, x2) = (&lo[l], &lo1[l], &lo2[l]);
            let last = l + 1 == layers;
            for j in 0..no {
                let row = &w[j * ni..(j + 1) * ni];
                let mut z = b[j];
                for i in 0..ni {
                    z += row[i] * x[i];
                }
                let mut zs = [0.0; 8];
                for s in 0..slots {
                    let xs = &x1[s * ni..(s + 1) * ni];
                    let mut acc = 0.0;
                    for i in 0..ni {
                        acc += row[i] * xs[i];
                    }
                    zs[s] = acc;
                }
                let mut zss = [0.0; 8];
                if l > 0 {
                    for s in 0..second {
                        let xs = &x2[s * ni..(s + 1) * ni];
                        let mut acc = 0.0;
                        for i in 0..ni {
                            acc += row[i] * xs[i];
                        }
                        zss[s] = acc;
                    }
                }
                if last {
                    self.out[0] = z;
                    self.out[1..1 + slots].copy_from_slice(&zs[..slots]);
                    self.out[1 + slots..].copy_from_slice(&zss[..second]);
                } else {
                    let y = z.tanh();
                    let d = 1.0 - y * y;
                    let dd = -2.0 * y * d;
                    hi[0][j] = y;
                    for s in 0..slots {
                        self.z1[l + 1][s * no + j] = zs[s];
                        hi1[0][s * no + j] = d * zs[s];
                    }
                    for s in 0..second {
                        self.z2[l + 1][s * no + j] = zss[s];
                        hi2[0][s * no + j] = dd * zs[s] * zs[s] + d * zss[s];
                    }
                }
            }
        }
        &self.out
    }

    /// Adds the parameter gradient of `adj · output` to `grad`, for the
    /// point of the last `forward` call. `adj` follows the output layout.
    pub fn backward(&mut self, theta: &[f64], adj: &[f64], grad: &mut [f64]) {
        let (slots, second) = (self.slots, self.second);
        let layers = self.sizes.len() - 1;
        self.g[0] = adj[0];
        self.g1[..slots].copy_from_slice(&adj[1..1 + slots]);
        self.g2[..second].copy_from_slice(&adj[1 + slots..1 + slots + second]);
        let mut off = theta.len();
        for l in (0..layers).rev() {
            let (ni, no) = (self.sizes[l], self.sizes[l + 1]);
            off -= ni * no + no;
            let w = &theta[off..off + ni * no];
            // g, g1, g2 hold pre-activation adjoints of layer l's output.
            let (x, x1, x2) = (&self.a[l], &self.a1[l], &self.a2[l]);
            {
                let gw = &mut grad[off..off + ni * no + no];
                for j in 0..no {
                    let gz = self.g[j];
                    let row = &mut gw[j * ni..(j + 1) * ni];
                    for i in 0..ni {
                        row[i] += gz * x[i];
                    }
                    for s in 0..slots {
                        let gs = self.g1[s * no + j];
                        if gs != 0.0 {
                            let xs = &x1[s * ni..(s + 1) * ni];
                            for i in 0..ni {
                                row[i] += gs * xs[i];
                            }
                        }
                    }
                    if l > 0 {
                        for s in 0..second {
                            let gs = self.g2[s * no + j];
                            if gs != 0.0 {
                                let xs = &x2[s * ni..(s + 1) * ni];
                                for i in 0..ni {
                                    row[i] += gs * xs[i];
                                }
                            }
                        }
                    }
                    gw[ni * no + j] += gz;
                }
            }
            if l == 0 {
                break;
            }
            // Adjoints of layer l's input (post-activation of layer l − 1).
            self.h[..ni].fill(0.0);
            self.h1[..ni * slots].fill(0.0);
            self.h2[..ni * second].fill(0.0);
            for j in 0..no {
                let row = &w[j * ni..(j + 1) * ni];
                let gz = self.g[j];
                for i in 0..ni {
                    self.h[i] += row[i] * gz;
                }
                for s in 0..slots {
                    let gs = self.g1[s * no + j];
                    let hs = &mut self.h1[s * ni..(s + 1) * ni];
                    for i in 0..ni {
                        hs[i] += row[i] * gs;
                    }
                }
                for s in 0..second {
                    let gs = self.g2[s * no + j];
                    let hs = &mut self.h2[s * ni..(s + 1) * ni];
                    for i in 0..ni {
                        hs[i] += row[i] * gs;
                    }
                }
            }
            // Through tanh into pre-activation adjoints.
            for i in 0..ni {
                let y = self.a[l][i];
                let d = 1.0 - y * y;
                let dd = -2.0 * y * d;
                let ddd = -2.0 * d * d + 4.0 * y * y * d;
                let mut gz = self.h[i] * d;
                for s in 0..slots {
                    let zs = self.z1[l][s * ni + i];
                    let hs = self.h1[s * ni + i];
                    gz += hs * dd * zs;
                    let mut gs = hs * d;
                    if s < second {
                        let zss = self.z2[l][s * ni + i];
                        let h2 = self.h2[s * ni + i];
                        gz += h2 * (ddd * zs * zs + dd * zss);
                        gs += h2 * 2.0 * dd * zs;
                        self.g2[s * ni + i] = h2 * d;
                    }
                    self.g1[s * ni + i] = gs;
                }
                self.g[i] = gz;
            }
        }
    }
}
