//! Reverse-mode automatic differentiation over [`Array3`] values.
//!
//! Every operation appends a node holding its value; [`Tape::backward`]
//! walks the nodes once in reverse order. Parameters enter through
//! [`Tape::param`] and their gradients come back indexed by parameter slot.

use std::sync::Arc;

use super::array::Array3;
use super::conv::{conv2d_backward, conv2d_forward};
use crate::error::{invalid, Result};

/// Handle to a node on a [`Tape`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Var(usize);

/// A fixed linear map with a known adjoint, recorded as a single node.
pub trait LinearOp: Send + Sync {
    fn output_shape(&self, input: (usize, usize, usize)) -> (usize, usize, usize);
    fn apply(&self, x: &Array3) -> Array3;
    fn adjoint(&self, g: &Array3) -> Array3;
}

enum Op {
    Input,
    Param(usize),
    Add(Var, Var),
    Sub(Var, Var),
    Mul(Var, Var),
    Div(Var, Var),
    Scale(Var, f64),
    AddScalar(Var),
    Sqrt(Var),
    Powf(Var, f64),
    ClampMin(Var, f64),
    Abs(Var),
    LeakyRelu(Var, f64),
    Conv2d { x: Var, weight: Var, bias: Var, k: usize },
    MaxPool2 { x: Var, argmax: Vec<usize> },
    Upsample2(Var),
    Concat(Vec<Var>),
    Channels { x: Var, start: usize },
    SoftThreshold { x: Var, lambda: Var },
    Softplus(Var),
    BoxFilter { x: Var, win: usize },
    AvgPool2(Var),
    Sum(Var),
    ComplexAbs(Var),
    Linear { x: Var, op: Arc<dyn LinearOp> },
}

struct Node {
    value: Array3,
    op: Op,
}

#[derive(Default)]
pub struct Tape {
    nodes: Vec<Node>,
}

/// Gradients of one scalar with respect to every parameter slot.
pub type ParamGrads = Vec<Array3>;

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, v: Var) -> &Array3 {
        &self.nodes[v.0].value
    }

    fn push(&mut self, value: Array3, op: Op) -> Var {
        self.nodes.push(Node { value, op });
        Var(self.nodes.len() - 1)
    }

    fn shape(&self, v: Var) -> (usize, usize, usize) {
        self.value(v).shape()
    }

    /// A constant: gradients stop here.
    pub fn input(&mut self, value: Array3) -> Var {
        self.push(value, Op::Input)
    }

    /// A trainable value stored in parameter slot `slot`.
    pub fn param(&mut self, slot: usize, value: Array3) -> Var {
        self.push(value, Op::Param(slot))
    }

    fn same_shape(&self, a: Var, b: Var) -> Result<()> {
        if self.shape(a) != self.shape(b) {
            return Err(invalid(format!("operand shapes {:?} and {:?} differ", self.shape(a), self.shape(b))));
        }
        Ok(())
    }

    fn binary(&mut self, a: Var, b: Var, f: impl Fn(f64, f64) -> f64, op: Op) -> Result<Var> {
        self.same_shape(a, b)?;
        let (x, y) = (self.value(a), self.value(b));
        let data = x.data.iter().zip(&y.data).map(|(&p, &q)| f(p, q)).collect();
        let value = x.with_data(data);
        Ok(self.push(value, op))
    }

    fn unary(&mut self, a: Var, f: impl Fn(f64) -> f64, op: Op) -> Var {
        let x = self.value(a);
        let value = x.with_data(x.data.iter().map(|&p| f(p)).collect());
        self.push(value, op)
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        self.binary(a, b, |p, q| p + q, Op::Add(a, b))
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var> {
        self.binary(a, b, |p, q| p - q, Op::Sub(a, b))
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        self.binary(a, b, |p, q| p * q, Op::Mul(a, b))
    }

    pub fn div(&mut self, a: Var, b: Var) -> Result<Var> {
        self.binary(a, b, |p, q| p / q, Op::Div(a, b))
    }

    pub fn scale(&mut self, a: Var, s: f64) -> Var {
        self.unary(a, |p| p * s, Op::Scale(a, s))
    }

    pub fn add_scalar(&mut self, a: Var, s: f64) -> Var {
        self.unary(a, |p| p + s, Op::AddScalar(a))
    }

    pub fn sqrt(&mut self, a: Var) -> Var {
        self.unary(a, f64::sqrt, Op::Sqrt(a))
    }

    pub fn powf(&mut self, a: Var, e: f64) -> Var {
        self.unary(a, |p| p.powf(e), Op::Powf(a, e))
    }

    pub fn clamp_min(&mut self, a: Var, lo: f64) -> Var {
        self.unary(a, |p| p.max(lo), Op::ClampMin(a, lo))
    }

    pub fn abs(&mut self, a: Var) -> Var {
        self.unary(a, f64::abs, Op::Abs(a))
    }

    pub fn leaky_relu(&mut self, a: Var, slope: f64) -> Var {
        self.unary(a, |p| if p > 0.0 { p } else { slope * p }, Op::LeakyRelu(a, slope))
    }

    pub fn relu(&mut self, a: Var) -> Var {
        self.leaky_relu(a, 0.0)
    }

    /// `log(1 + eˣ)`, evaluated without overflow.
    pub fn softplus(&mut self, a: Var) -> Var {
        self.unary(a, softplus, Op::Softplus(a))
    }

    /// Same-size convolution. `weight` is `[co, ci, k·k]`, `bias` is `[co, 1, 1]`.
    pub fn conv2d(&mut self, x: Var, weight: Var, bias: Var, k: usize) -> Result<Var> {
        let (ci, _, _) = self.shape(x);
        let (co, wi, kk) = self.shape(weight);
        if k % 2 == 0 || wi != ci || kk != k * k || self.shape(bias) != (co, 1, 1) {
            return Err(invalid(format!(
                "conv2d: input {:?}, weight {:?}, bias {:?}, kernel {k}",
                self.shape(x),
                self.shape(weight),
                self.shape(bias)
            )));
        }
        let value = conv2d_forward(self.value(x), self.value(weight), self.value(bias), k);
        Ok(self.push(value, Op::Conv2d { x, weight, bias, k }))
    }

    /// 2×2 max pooling; a trailing odd row or column is dropped.
    pub fn maxpool2(&mut self, a: Var) -> Result<Var> {
        let x = self.value(a);
        let (c, h, w) = x.shape();
        let (oh, ow) = (h / 2, w / 2);
        if oh == 0 || ow == 0 {
            return Err(invalid(format!("cannot pool a {h}x{w} map")));
        }
        let mut out = Array3::zeros(c, oh, ow);
        let mut argmax = vec![0; c * oh * ow];
        for ch in 0..c {
            for r in 0..oh {
                for col in 0..ow {
                    let mut best = (ch * h + 2 * r) * w + 2 * col;
                    for (dr, dc) in [(0, 1), (1, 0), (1, 1)] {
                        let i = (ch * h + 2 * r + dr) * w + 2 * col + dc;
                        if x.data[i] > x.data[best] {
                            best = i;
                        }
                    }
                    let o = (ch * oh + r) * ow + col;
                    out.data[o] = x.data[best];
                    argmax[o] = best;
                }
            }
        }
        Ok(self.push(out, Op::MaxPool2 { x: a, argmax }))
    }

    /// Nearest-neighbor upsampling to `(h, w)`; rows and columns past `2×` repeat the last one.
    pub fn upsample2(&mut self, a: Var, h: usize, w: usize) -> Var {
        let x = self.value(a);
        let mut out = Array3::zeros(x.c, h, w);
        for ch in 0..x.c {
            for r in 0..h {
                let sr = (r / 2).min(x.h - 1);
                for col in 0..w {
                    out.data[(ch * h + r) * w + col] = x.data[(ch * x.h + sr) * x.w + (col / 2).min(x.w - 1)];
                }
            }
        }
        self.push(out, Op::Upsample2(a))
    }

    pub fn concat(&mut self, parts: &[Var]) -> Result<Var> {
        let first = *parts.first().ok_or_else(|| invalid("concat of nothing"))?;
        let (_, h, w) = self.shape(first);
        let mut data = Vec::new();
        let mut c = 0;
        for &p in parts {
            let v = self.value(p);
            if (v.h, v.w) != (h, w) {
                return Err(invalid(format!("concat: {:?} next to {h}x{w}", v.shape())));
            }
            c += v.c;
            data.extend_from_slice(&v.data);
        }
        Ok(self.push(Array3 { c, h, w, data }, Op::Concat(parts.to_vec())))
    }

    /// Channels `start..start + count`.
    pub fn channels(&mut self, a: Var, start: usize, count: usize) -> Result<Var> {
        let x = self.value(a);
        if start + count > x.c {
            return Err(invalid(format!("channels {start}..{} of {}", start + count, x.c)));
        }
        let p = x.plane();
        let value = Array3 { c: count, h: x.h, w: x.w, data: x.data[start * p..(start + count) * p].to_vec() };
        Ok(self.push(value, Op::Channels { x: a, start }))
    }

    /// Soft-thresholding with a threshold per channel (`[c, 1, 1]`) or a shared one (`[1, 1, 1]`).
    pub fn soft_threshold(&mut self, a: Var, lambda: Var) -> Result<Var> {
        let (c, _, _) = self.shape(a);
        let lc = self.shape(lambda);
        if lc != (c, 1, 1) && lc != (1, 1, 1) {
            return Err(invalid(format!("threshold shape {lc:?} for {c} channels")));
        }
        let lam = &self.value(lambda).data;
        if lam.iter().any(|&l| !(l >= 0.0)) {
            return Err(invalid("soft-threshold needs non-negative thresholds"));
        }
        let x = self.value(a);
        let p = x.plane();
        let data = x
            .data
            .iter()
            .enumerate()
            .map(|(i, &u)| {
                let t = lam[if lam.len() == 1 { 0 } else { i / p }];
                crate::sparsity::shrink_real(u, t)
            })
            .collect();
        let value = x.with_data(data);
        Ok(self.push(value, Op::SoftThreshold { x: a, lambda }))
    }

    /// Sum over every fully contained `win × win` window, per channel.
    pub fn box_filter(&mut self, a: Var, win: usize) -> Result<Var> {
        let x = self.value(a);
        if win == 0 || win > x.h || win > x.w {
            return Err(invalid(format!("window {win} does not fit {}x{}", x.h, x.w)));
        }
        let (oh, ow) = (x.h + 1 - win, x.w + 1 - win);
        let mut data = Vec::with_capacity(x.c * oh * ow);
        for ch in 0..x.c {
            let (s, _, _) = crate::metrics::box_sum_valid(x.channel(ch), x.h, x.w, win);
            data.extend(s);
        }
        Ok(self.push(Array3 { c: x.c, h: oh, w: ow, data }, Op::BoxFilter { x: a, win }))
    }

    pub fn avgpool2(&mut self, a: Var) -> Result<Var> {
        let x = self.value(a);
        let (oh, ow) = (x.h / 2, x.w / 2);
        if oh == 0 || ow == 0 {
            return Err(invalid(format!("cannot pool a {}x{} map", x.h, x.w)));
        }
        let mut out = Array3::zeros(x.c, oh, ow);
        for ch in 0..x.c {
            for r in 0..oh {
                for col in 0..ow {
                    let at = |dr: usize, dc: usize| x.data[(ch * x.h + 2 * r + dr) * x.w + 2 * col + dc];
                    out.data[(ch * oh + r) * ow + col] = 0.25 * (at(0, 0) + at(0, 1) + at(1, 0) + at(1, 1));
                }
            }
        }
        Ok(self.push(out, Op::AvgPool2(a)))
    }

    pub fn sum(&mut self, a: Var) -> Var {
        let s = self.value(a).sum();
        self.push(Array3::scalar(s), Op::Sum(a))
    }

    pub fn mean(&mut self, a: Var) -> Var {
        let n = self.value(a).len() as f64;
        let s = self.sum(a);
        self.scale(s, 1.0 / n)
    }

    /// `√(re² + im²)` for each (real, imaginary) channel pair.
    pub fn complex_abs(&mut self, a: Var) -> Result<Var> {
        let x = self.value(a);
        if x.c % 2 != 0 {
            return Err(invalid(format!("complex magnitude needs an even channel count, got {}", x.c)));
        }
        let p = x.plane();
        let mut out = Array3::zeros(x.c / 2, x.h, x.w);
        for k in 0..x.c / 2 {
            let (re, im) = (&x.data[2 * k * p..(2 * k + 1) * p], &x.data[(2 * k + 1) * p..(2 * k + 2) * p]);
            for (o, (a, b)) in out.channel_mut(k).iter_mut().zip(re.iter().zip(im)) {
                *o = a.hypot(*b);
            }
        }
        Ok(self.push(out, Op::ComplexAbs(a)))
    }

    pub fn linear(&mut self, a: Var, op: Arc<dyn LinearOp>) -> Var {
        let value = op.apply(self.value(a));
        self.push(value, Op::Linear { x: a, op })
    }

    /// Gradients of the scalar `loss` for `num_slots` parameter slots.
    pub fn backward(&self, loss: Var, num_slots: usize) -> Result<ParamGrads> {
        let lv = self.value(loss);
        if lv.len() != 1 {
            return Err(invalid(format!("backward needs a scalar loss, got shape {:?}", lv.shape())));
        }
        let mut grads: Vec<Option<Vec<f64>>> = (0..=loss.0).map(|_| None).collect();
        grads[loss.0] = Some(vec![1.0]);
        let mut out: ParamGrads = Vec::with_capacity(num_slots);
        let mut slot_shapes: Vec<Option<(usize, usize, usize)>> = vec![None; num_slots];
        for node in &self.nodes[..=loss.0] {
            if let Op::Param(s) = node.op {
                if s >= num_slots {
                    return Err(invalid(format!("parameter slot {s} beyond {num_slots}")));
                }
                slot_shapes[s] = Some(node.value.shape());
            }
        }
        for s in &slot_shapes {
            let (c, h, w) = s.unwrap_or((0, 0, 0));
            out.push(Array3::zeros(c, h, w));
        }

        for i in (0..=loss.0).rev() {
            let Some(g) = grads[i].take() else { continue };
            let node = &self.nodes[i];
            let value = &node.value;
            match &node.op {
                Op::Input => {}
                Op::Param(s) => {
                    for (o, v) in out[*s].data.iter_mut().zip(&g) {
                        *o += v;
                    }
                }
                Op::Add(a, b) => {
                    accumulate(&mut grads, *a, &g, |_, v| v);
                    accumulate(&mut grads, *b, &g, |_, v| v);
                }
                Op::Sub(a, b) => {
                    accumulate(&mut grads, *a, &g, |_, v| v);
                    accumulate(&mut grads, *b, &g, |_, v| -v);
                }
                Op::Mul(a, b) => {
                    let (x, y) = (&self.nodes[a.0].value.data, &self.nodes[b.0].value.data);
                    accumulate(&mut grads, *a, &g, |j, v| v * y[j]);
                    accumulate(&mut grads, *b, &g, |j, v| v * x[j]);
                }
                Op::Div(a, b) => {
                    let (x, y) = (&self.nodes[a.0].value.data, &self.nodes[b.0].value.data);
                    accumulate(&mut grads, *a, &g, |j, v| v / y[j]);
                    accumulate(&mut grads, *b, &g, |j, v| -v * x[j] / (y[j] * y[j]));
                }
                Op::Scale(a, s) => accumulate(&mut grads, *a, &g, |_, v| v * s),
                Op::AddScalar(a) => accumulate(&mut grads, *a, &g, |_, v| v),
                Op::Sqrt(a) => {
                    accumulate(&mut grads, *a, &g, |j, v| if value.data[j] > 0.0 { 0.5 * v / value.data[j] } else { 0.0 })
                }
                Op::Powf(a, e) => {
                    let x = &self.nodes[a.0].value.data;
                    accumulate(&mut grads, *a, &g, |j, v| if x[j] == 0.0 { 0.0 } else { v * e * x[j].powf(e - 1.0) })
                }
                Op::ClampMin(a, lo) => {
                    let x = &self.nodes[a.0].value.data;
                    accumulate(&mut grads, *a, &g, |j, v| if x[j] > *lo { v } else { 0.0 })
                }
                Op::Abs(a) => {
                    let x = &self.nodes[a.0].value.data;
                    accumulate(&mut grads, *a, &g, |j, v| v * sign(x[j]))
                }
                Op::LeakyRelu(a, slope) => {
                    let x = &self.nodes[a.0].value.data;
                    accumulate(&mut grads, *a, &g, |j, v| if x[j] > 0.0 { v } else { slope * v })
                }
                Op::Softplus(a) => {
                    let x = &self.nodes[a.0].value.data;
                    accumulate(&mut grads, *a, &g, |j, v| v * sigmoid(x[j]))
                }
                Op::Conv2d { x, weight, bias, k } => {
                    let xv = &self.nodes[x.0].value;
                    let wv = &self.nodes[weight.0].value;
                    let mut gx = wants(&self.nodes, x.0).then(|| vec![0.0; xv.len()]);
                    let mut gw = vec![0.0; wv.len()];
                    let mut gb = vec![0.0; wv.c];
                    conv2d_backward(xv, wv, *k, &g, gx.as_deref_mut(), Some(&mut gw), Some(&mut gb));
                    if let Some(gx) = gx {
                        add_into(&mut grads, *x, gx);
                    }
                    add_into(&mut grads, *weight, gw);
                    add_into(&mut grads, *bias, gb);
                }
                Op::MaxPool2 { x, argmax } => {
                    let mut gx = vec![0.0; self.nodes[x.0].value.len()];
                    for (&src, v) in argmax.iter().zip(&g) {
                        gx[src] += v;
                    }
                    add_into(&mut grads, *x, gx);
                }
                Op::Upsample2(x) => {
                    let xv = &self.nodes[x.0].value;
                    let mut gx = vec![0.0; xv.len()];
                    let (h, w) = (value.h, value.w);
                    for ch in 0..xv.c {
                        for r in 0..h {
                            let sr = (r / 2).min(xv.h - 1);
                            for col in 0..w {
                                gx[(ch * xv.h + sr) * xv.w + (col / 2).min(xv.w - 1)] += g[(ch * h + r) * w + col];
                            }
                        }
                    }
                    add_into(&mut grads, *x, gx);
                }
                Op::Concat(parts) => {
                    let mut offset = 0;
                    for p in parts {
                        let n = self.nodes[p.0].value.len();
                        add_into(&mut grads, *p, g[offset..offset + n].to_vec());
                        offset += n;
                    }
                }
                Op::Channels { x, start } => {
                    let xv = &self.nodes[x.0].value;
                    let mut gx = vec![0.0; xv.len()];
                    let off = start * xv.plane();
                    gx[off..off + g.len()].copy_from_slice(&g);
                    add_into(&mut grads, *x, gx);
                }
                Op::SoftThreshold { x, lambda } => {
                    let xv = &self.nodes[x.0].value;
                    let lam = &self.nodes[lambda.0].value.data;
                    let p = xv.plane();
                    let mut gx = vec![0.0; xv.len()];
                    let mut gl = vec![0.0; lam.len()];
                    for (j, (&u, &v)) in xv.data.iter().zip(&g).enumerate() {
                        let li = if lam.len() == 1 { 0 } else { j / p };
                        if u.abs() > lam[li] {
                            gx[j] = v;
                            gl[li] -= v * sign(u);
                        }
                    }
                    add_into(&mut grads, *x, gx);
                    add_into(&mut grads, *lambda, gl);
                }
                Op::BoxFilter { x, win } => {
                    let xv = &self.nodes[x.0].value;
                    let mut gx = vec![0.0; xv.len()];
                    let (oh, ow) = (value.h, value.w);
                    for ch in 0..xv.c {
                        for r in 0..oh {
                            for col in 0..ow {
                                let v = g[(ch * oh + r) * ow + col];
                                for dr in 0..*win {
                                    let base = (ch * xv.h + r + dr) * xv.w + col;
                                    gx[base..base + win].iter_mut().for_each(|t| *t += v);
                                }
                            }
                        }
                    }
                    add_into(&mut grads, *x, gx);
                }
                Op::AvgPool2(x) => {
                    let xv = &self.nodes[x.0].value;
                    let mut gx = vec![0.0; xv.len()];
                    let (oh, ow) = (value.h, value.w);
                    for ch in 0..xv.c {
                        for r in 0..oh {
                            for col in 0..ow {
                                let v = 0.25 * g[(ch * oh + r) * ow + col];
                                for (dr, dc) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
                                    gx[(ch * xv.h + 2 * r + dr) * xv.w + 2 * col + dc] += v;
                                }
                            }
                        }
                    }
                    add_into(&mut grads, *x, gx);
                }
                Op::Sum(x) => {
                    let n = self.nodes[x.0].value.len();
                    add_into(&mut grads, *x, vec![g[0]; n]);
                }
                Op::ComplexAbs(x) => {
                    let xv = &self.nodes[x.0].value;
                    let p = xv.plane();
                    let mut gx = vec![0.0; xv.len()];
                    for k in 0..value.c {
                        for j in 0..p {
                            let m = value.data[k * p + j];
                            if m > 0.0 {
                                let (re, im) = (xv.data[2 * k * p + j], xv.data[(2 * k + 1) * p + j]);
                                gx[2 * k * p + j] = g[k * p + j] * re / m;
                                gx[(2 * k + 1) * p + j] = g[k * p + j] * im / m;
                            }
                        }
                    }
                    add_into(&mut grads, *x, gx);
                }
                Op::Linear { x, op } => {
                    let gy = value.with_data(g);
                    add_into(&mut grads, *x, op.adjoint(&gy).data);
                }
            }
        }
        Ok(out)
    }

    /// Branch taken by every non-smooth node at every element: sign or
    /// active-side flags, and the winning index of each max-pool window.
    /// Two evaluations with equal patterns lie on the same smooth piece.
    pub fn branch_pattern(&self) -> Vec<usize> {
        let side = |v: f64, lo: f64| usize::from(v > lo) + usize::from(v < lo) * 2;
        let mut out = Vec::new();
        for node in &self.nodes {
            let input = |x: &Var| &self.nodes[x.0].value.data;
            match &node.op {
                Op::ClampMin(x, lo) => out.extend(input(x).iter().map(|&v| side(v, *lo))),
                Op::Abs(x) | Op::LeakyRelu(x, _) | Op::ComplexAbs(x) => out.extend(input(x).iter().map(|&v| side(v, 0.0))),
                Op::MaxPool2 { argmax, .. } => out.extend(argmax),
                Op::SoftThreshold { x, lambda } => {
                    let xv = &self.nodes[x.0].value;
                    let lam = &self.nodes[lambda.0].value.data;
                    let p = xv.plane();
                    out.extend(xv.data.iter().enumerate().map(|(j, &u)| side(u.abs(), lam[if lam.len() == 1 { 0 } else { j / p }])));
                }
                _ => {}
            }
        }
        out
    }

    /// Input of every soft-threshold node, in recording order.
    pub fn soft_threshold_inputs(&self) -> Vec<&Array3> {
        self.nodes
            .iter()
            .filter_map(|node| match &node.op {
                Op::SoftThreshold { x, .. } => Some(&self.nodes[x.0].value),
                _ => None,
            })
            .collect()
    }

    /// Input of every leaky-ReLU node, in recording order.
    pub fn leaky_relu_inputs(&self) -> Vec<&Array3> {
        self.nodes
            .iter()
            .filter_map(|node| match &node.op {
                Op::LeakyRelu(x, _) => Some(&self.nodes[x.0].value),
                _ => None,
            })
            .collect()
    }

    /// Smallest `| |u| − λ |` over every soft-threshold node: how far the
    /// recorded evaluation sits from the non-differentiable kink.
    pub fn kink_margin(&self) -> f64 {
        let mut margin = f64::INFINITY;
        for node in &self.nodes {
            if let Op::SoftThreshold { x, lambda } = &node.op {
                let xv = &self.nodes[x.0].value;
                let lam = &self.nodes[lambda.0].value.data;
                let p = xv.plane();
                for (j, u) in xv.data.iter().enumerate() {
                    let t = lam[if lam.len() == 1 { 0 } else { j / p }];
                    margin = margin.min((u.abs() - t).abs());
                }
            }
        }
        margin
    }
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

pub(crate) fn softplus(x: f64) -> f64 {
    if x > 30.0 {
        x
    } else {
        x.exp().ln_1p()
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Whether any gradient can flow into node `i` (constants need none).
fn wants(nodes: &[Node], i: usize) -> bool {
    !matches!(nodes[i].op, Op::Input)
}

fn add_into(grads: &mut [Option<Vec<f64>>], v: Var, g: Vec<f64>) {
    match &mut grads[v.0] {
        Some(existing) => existing.iter_mut().zip(&g).for_each(|(e, x)| *e += x),
        slot @ None => *slot = Some(g),
    }
}

fn accumulate(grads: &mut [Option<Vec<f64>>], v: Var, g: &[f64], f: impl Fn(usize, f64) -> f64) {
    match &mut grads[v.0] {
        Some(existing) => existing.iter_mut().zip(g).enumerate().for_each(|(j, (e, &x))| *e += f(j, x)),
        slot @ None => *slot = Some(g.iter().enumerate().map(|(j, &x)| f(j, x)).collect()),
    }
}
