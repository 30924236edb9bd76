use std::cell::RefCell;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use super::real::{stable_tanh, Real};

/// Opcode of a recorded node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Op {
    Input,
    Add,
    Sub,
    Mul,
    Div,
    Neg,
    Scale,
    Shift,
    Tanh,
    Exp,
    Ln,
    Sqrt,
    Sin,
    Cos,
    Dot,
}

#[derive(Default)]
struct Inner {
    ops: Vec<Op>,
    /// `ends[i]` is one past the last edge of node `i`.
    ends: Vec<u32>,
    parents: Vec<u32>,
    partials: Vec<f64>,
    first_bad: Option<(Op, usize)>,
}

impl Inner {
    fn push(&mut self, op: Op, value: f64, edges: &[(u32, f64)]) -> u32 {
        let index = self.ops.len();
        for &(p, d) in edges {
            if d != 0.0 {
                self.parents.push(p);
                self.partials.push(d);
            }
        }
        self.ops.push(op);
        self.ends.push(self.parents.len() as u32);
        if !value.is_finite() && self.first_bad.is_none() {
            self.first_bad = Some((op, index));
        }
        index as u32
    }
}

/// Append-only expression tape for reverse-mode differentiation.
///
/// Nodes store their local partials at record time, so the backward sweep is
/// a single pass of multiply-adds.
#[derive(Default)]
pub struct Tape {
    inner: RefCell<Inner>,
}

/// Adjoints produced by one backward sweep.
#[derive(Debug, Clone)]
pub struct Sweep {
    pub adjoints: Vec<f64>,
    /// Number of nodes the sweep visited.
    pub visits: usize,
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(nodes: usize, edges: usize) -> Self {
        Tape {
            inner: RefCell::new(Inner {
                ops: Vec::with_capacity(nodes),
                ends: Vec::with_capacity(nodes),
                parents: Vec::with_capacity(edges),
                partials: Vec::with_capacity(edges),
                first_bad: None,
            }),
        }
    }

    pub fn input(&self, value: f64) -> Var<'_> {
        let index = self.inner.borrow_mut().push(Op::Input, value, &[]);
        Var { tape: Some(self), index, value }
    }

    pub fn inputs(&self, values: &[f64]) -> Vec<Var<'_>> {
        values.iter().map(|&v| self.input(v)).collect()
    }

    pub fn len(&self) -> usize {
        self.inner.borrow().ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn edge_count(&self) -> usize {
        self.inner.borrow().parents.len()
    }

    pub fn op(&self, index: usize) -> Op {
        self.inner.borrow().ops[index]
    }

    /// Operand indices of a node.
    pub fn operands(&self, index: usize) -> Vec<usize> {
        let inner = self.inner.borrow();
        let start = if index == 0 { 0 } else { inner.ends[index - 1] as usize };
        inner.parents[start..inner.ends[index] as usize].iter().map(|&p| p as usize).collect()
    }

    /// First node whose value was not finite, if any.
    pub fn first_non_finite(&self) -> Option<(Op, usize)> {
        self.inner.borrow().first_bad
    }

    /// Backward sweep from `output` over every node at or below it.
    pub fn gradient(&self, output: Var<'_>) -> Sweep {
        let inner = self.inner.borrow();
        if output.tape.is_none() {
            return Sweep { adjoints: vec![0.0; inner.ops.len()], visits: 0 };
        }
        let n = output.index as usize + 1;
        let mut adj = vec![0.0; n];
        adj[n - 1] = 1.0;
        let mut visits = 0;
        for i in (0..n).rev() {
            visits += 1;
            let a = adj[i];
            if a == 0.0 {
                continue;
            }
            let start = if i == 0 { 0 } else { inner.ends[i - 1] as usize };
            let end = inner.ends[i] as usize;
            for e in start..end {
                adj[inner.parents[e] as usize] += inner.partials[e] * a;
            }
        }
        Sweep { adjoints: adj, visits }
    }
}

/// A scalar recorded on a [`Tape`]. Values with no tape are constants and
/// never produce nodes.
#[derive(Clone, Copy)]
pub struct Var<'t> {
    tape: Option<&'t Tape>,
    index: u32,
    value: f64,
}

impl fmt::Debug for Var<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.tape {
            Some(_) => write!(f, "Var(#{} = {})", self.index, self.value),
            None => write!(f, "Const({})", self.value),
        }
    }
}

impl<'t> Var<'t> {
    pub fn index(&self) -> Option<usize> {
        self.tape.map(|_| self.index as usize)
    }

    pub fn is_constant(&self) -> bool {
        self.tape.is_none()
    }

    fn constant_of(value: f64) -> Self {
        Var { tape: None, index: 0, value }
    }

    fn unary(self, op: Op, value: f64, d: f64) -> Self {
        match self.tape {
            None => Var::constant_of(value),
            Some(t) => {
                let index = t.inner.borrow_mut().push(op, value, &[(self.index, d)]);
                Var { tape: Some(t), index, value }
            }
        }
    }

    fn binary(self, rhs: Self, op: Op, value: f64, da: f64, db: f64) -> Self {
        let (tape, edges): (&Tape, &[(u32, f64)]) = match (self.tape, rhs.tape) {
            (None, None) => return Var::constant_of(value),
            (Some(t), None) => (t, &[(self.index, da)]),
            (None, Some(t)) => (t, &[(rhs.index, db)]),
            (Some(t), Some(_)) => (t, &[(self.index, da), (rhs.index, db)]),
        };
        let index = tape.inner.borrow_mut().push(op, value, edges);
        Var { tape: Some(tape), index, value }
    }
}

impl<'t> Add for Var<'t> {
    type Output = Self;
    #[inline]
    fn add(self, rhs: Self) -> Self {
        if rhs.tape.is_none() {
            return self + rhs.value;
        }
        if self.tape.is_none() {
            return rhs + self.value;
        }
        self.binary(rhs, Op::Add, self.value + rhs.value, 1.0, 1.0)
    }
}

impl<'t> Sub for Var<'t> {
    type Output = Self;
    #[inline]
    fn sub(self, rhs: Self) -> Self {
        if rhs.tape.is_none() {
            return self - rhs.value;
        }
        self.binary(rhs, Op::Sub, self.value - rhs.value, 1.0, -1.0)
    }
}

impl<'t> Mul for Var<'t> {
    type Output = Self;
    #[inline]
    fn mul(self, rhs: Self) -> Self {
        if rhs.tape.is_none() {
            return self * rhs.value;
        }
        if self.tape.is_none() {
            return rhs * self.value;
        }
        self.binary(rhs, Op::Mul, self.value * rhs.value, rhs.value, self.value)
    }
}

impl<'t> Div for Var<'t> {
    type Output = Self;
    #[inline]
    fn div(self, rhs: Self) -> Self {
        let q = self.value / rhs.value;
        self.binary(rhs, Op::Div, q, 1.0 / rhs.value, -q / rhs.value)
    }
}

impl<'t> Neg for Var<'t> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        self.unary(Op::Neg, -self.value, -1.0)
    }
}

impl<'t> Add<f64> for Var<'t> {
    type Output = Self;
    #[inline]
    fn add(self, rhs: f64) -> Self {
        if rhs == 0.0 {
            return self;
        }
        self.unary(Op::Shift, self.value + rhs, 1.0)
    }
}

impl<'t> Sub<f64> for Var<'t> {
    type Output = Self;
    #[inline]
    fn sub(self, rhs: f64) -> Self {
        if rhs == 0.0 {
            return self;
        }
        self.unary(Op::Shift, self.value - rhs, 1.0)
    }
}

impl<'t> Mul<f64> for Var<'t> {
    type Output = Self;
    #[inline]
    fn mul(self, rhs: f64) -> Self {
        if rhs == 1.0 {
            return self;
        }
        if rhs == 0.0 {
            return Var::constant_of(self.value * rhs);
        }
        self.unary(Op::Scale, self.value * rhs, rhs)
    }
}

impl<'t> Div<f64> for Var<'t> {
    type Output = Self;
    #[inline]
    fn div(self, rhs: f64) -> Self {
        if rhs == 1.0 {
            return self;
        }
        self.unary(Op::Scale, self.value / rhs, 1.0 / rhs)
    }
}

impl<'t> Real for Var<'t> {
    #[inline]
    fn constant(value: f64) -> Self {
        Var::constant_of(value)
    }
    #[inline]
    fn value(&self) -> f64 {
        self.value
    }
    fn tanh(self) -> Self {
        let y = stable_tanh(self.value);
        self.unary(Op::Tanh, y, 1.0 - y * y)
    }
    fn exp(self) -> Self {
        let y = self.value.exp();
        self.unary(Op::Exp, y, y)
    }
    fn ln(self) -> Self {
        self.unary(Op::Ln, self.value.ln(), 1.0 / self.value)
    }
    fn sqrt(self) -> Self {
        let y = self.value.sqrt();
        self.unary(Op::Sqrt, y, 0.5 / y)
    }
    fn sin(self) -> Self {
        self.unary(Op::Sin, self.value.sin(), self.value.cos())
    }
    fn cos(self) -> Self {
        self.unary(Op::Cos, self.value.cos(), -self.value.sin())
    }

    fn dot(weights: &[Self], xs: &[Self], bias: Self) -> Self {
        debug_assert_eq!(weights.len(), xs.len());
        let mut value = bias.value;
        let mut tape = bias.tape;
        let mut edges: Vec<(u32, f64)> = Vec::with_capacity(2 * xs.len() + 1);
        if bias.tape.is_some() {
            edges.push((bias.index, 1.0));
        }
        for (w, x) in weights.iter().zip(xs) {
            value += w.value * x.value;
            if w.tape.is_some() {
                edges.push((w.index, x.value));
                tape = tape.or(w.tape);
            }
            if x.tape.is_some() {
                edges.push((x.index, w.value));
                tape = tape.or(x.tape);
            }
        }
        match tape {
            None => Var::constant_of(value),
            Some(t) => {
                let index = t.inner.borrow_mut().push(Op::Dot, value, &edges);
                Var { tape: Some(t), index, value }
            }
        }
    }

    fn sum(xs: &[Self]) -> Self {
        let mut value = 0.0;
        let mut tape = None;
        let mut edges: Vec<(u32, f64)> = Vec::with_capacity(xs.len());
        for x in xs {
            value += x.value;
            if x.tape.is_some() {
                edges.push((x.index, 1.0));
                tape = tape.or(x.tape);
            }
        }
        match tape {
            None => Var::constant_of(value),
            Some(t) => {
                let index = t.inner.borrow_mut().push(Op::Dot, value, &edges);
                Var { tape: Some(t), index, value }
            }
        }
    }

    fn square(self) -> Self {
        self.unary(Op::Mul, self.value * self.value, 2.0 * self.value)
    }

    fn recip(self) -> Self {
        let y = 1.0 / self.value;
        self.unary(Op::Div, y, -y * y)
    }
}
