//! Hierarchical-softmax skip-gram objective for a single (center, context)
//! pair.
//!
//! For center vector `v` and the path of the context word through the tree,
//! the pair loss is `-Σ log σ((1 - 2b) · v·u_n)` over the inner nodes `n`
//! with branch bits `b`. Inner-node vectors `u_n` are rows of a row-major
//! matrix with `dim` columns.

use num_traits::Float;

#[inline]
pub fn sigmoid<F: Float>(x: F) -> F {
    F::one() / (F::one() + (-x).exp())
}

/// `-log σ(x)`, computed without overflow for large `|x|`.
#[inline]
fn neg_log_sigmoid<F: Float>(x: F) -> F {
    (-x).max(F::zero()) + (-x.abs()).exp().ln_1p()
}

#[inline]
fn sign<F: Float>(bit: u8) -> F {
    if bit == 0 {
        F::one()
    } else {
        -F::one()
    }
}

#[inline]
pub(crate) fn dot<F: Float>(a: &[F], b: &[F]) -> F {
    // Eight partial sums let the compiler vectorize the reduction.
    let mut acc = [F::zero(); 8];
    let chunks_a = a.chunks_exact(8);
    let chunks_b = b.chunks_exact(8);
    let tail: F = chunks_a
        .remainder()
        .iter()
        .zip(chunks_b.remainder())
        .fold(F::zero(), |s, (&x, &y)| s + x * y);
    for (ca, cb) in chunks_a.zip(chunks_b) {
        for k in 0..8 {
            acc[k] = acc[k] + ca[k] * cb[k];
        }
    }
    acc.iter().fold(tail, |s, &x| s + x)
}

#[inline]
fn axpy<F: Float>(alpha: F, x: &[F], y: &mut [F]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi = *yi + alpha * xi;
    }
}

#[inline]
fn row<F>(matrix: &[F], dim: usize, node: u32) -> &[F] {
    let start = node as usize * dim;
    &matrix[start..start + dim]
}

/// Loss of one pair.
pub fn pair_loss<F: Float>(center: &[F], inner: &[F], path: &[u32], code: &[u8]) -> F {
    let dim = center.len();
    path.iter().zip(code).fold(F::zero(), |loss, (&node, &bit)| {
        let f = dot(center, row(inner, dim, node));
        loss + neg_log_sigmoid(sign::<F>(bit) * f)
    })
}

/// Gradient of one pair's loss.
#[derive(Clone, Debug, PartialEq)]
pub struct PairGradient<F> {
    pub center: Vec<F>,
    /// Gradient per inner node on the path, in path order.
    pub inner: Vec<(u32, Vec<F>)>,
}

/// Analytic gradient of [`pair_loss`] with respect to the center vector and
/// every inner vector on the path.
pub fn pair_gradient<F: Float>(center: &[F], inner: &[F], path: &[u32], code: &[u8]) -> PairGradient<F> {
    let dim = center.len();
    let mut grad_center = vec![F::zero(); dim];
    let mut grad_inner = Vec::with_capacity(path.len());
    for (&node, &bit) in path.iter().zip(code) {
        let u = row(inner, dim, node);
        // d/df [-log σ(s f)] = σ(f) - (1 - b)
        let g = sigmoid(dot(center, u)) - F::from(1 - bit).unwrap();
        axpy(g, u, &mut grad_center);
        grad_inner.push((node, center.iter().map(|&c| g * c).collect()));
    }
    PairGradient {
        center: grad_center,
        inner: grad_inner,
    }
}

/// One SGD step on a pair: moves the center vector and the inner vectors on
/// the path by `-lr` times the gradient. Returns the pair's loss before the
/// step. `scratch` must have length `dim`.
#[inline]
pub fn pair_step<F: Float>(
    center: &mut [F],
    inner: &mut [F],
    path: &[u32],
    code: &[u8],
    lr: F,
    scratch: &mut [F],
) -> F {
    let dim = center.len();
    scratch.iter_mut().for_each(|x| *x = F::zero());
    let mut loss = F::zero();
    for (&node, &bit) in path.iter().zip(code) {
        let start = node as usize * dim;
        let u = &mut inner[start..start + dim];
        let f = dot(center, u);
        let p = sigmoid(f);
        // Probability assigned to the branch actually taken.
        let taken = if bit == 0 { p } else { F::one() - p };
        loss = loss - taken.max(F::min_positive_value()).ln();
        let g = lr * (F::from(1 - bit).unwrap() - p);
        axpy(g, u, scratch);
        axpy(g, center, u);
    }
    axpy(F::one(), scratch, center);
    loss
}

/// The (path, code) of each context word in one center word's window.
pub(crate) type Contexts<'t> = [(&'t [u32], &'t [u8])];

/// f32 training kernel: one SGD step per context in `contexts`, in order,
/// each updating `center` before the next. Returns the summed loss.
pub(crate) type WindowFn = fn(&mut [f32], &mut [f32], &Contexts<'_>, f32, &mut [f32]) -> f64;

/// The kernel for the widest vector unit this CPU offers. The environment
/// variable `SHORTSHIFT_KERNEL` (`avx512`, `avx2` or `portable`) caps the
/// choice, e.g. to get identical bits across machines; FMA kernels round
/// differently from the portable one.
pub(crate) fn window_kernel() -> WindowFn {
    select_kernel().1
}

/// Name of the training kernel in use: `avx512`, `avx2` or `portable`.
pub fn kernel_name() -> &'static str {
    select_kernel().0
}

fn select_kernel() -> (&'static str, WindowFn) {
    let cap = std::env::var("SHORTSHIFT_KERNEL").unwrap_or_default();
    #[cfg(target_arch = "x86_64")]
    {
        let fma = std::is_x86_feature_detected!("fma");
        if fma && std::is_x86_feature_detected!("avx512f") && !matches!(cap.as_str(), "avx2" | "portable") {
            // SAFETY: the required features were just detected.
            return ("avx512", |c, i, w, lr, s| unsafe { simd::window_avx512(c, i, w, lr, s) });
        }
        if fma && std::is_x86_feature_detected!("avx2") && cap != "portable" {
            // SAFETY: as above.
            return ("avx2", |c, i, w, lr, s| unsafe { simd::window_avx2(c, i, w, lr, s) });
        }
    }
    let _ = cap;
    ("portable", window_portable)
}

pub(crate) fn window_portable(
    center: &mut [f32],
    inner: &mut [f32],
    contexts: &Contexts<'_>,
    lr: f32,
    scratch: &mut [f32],
) -> f64 {
    contexts
        .iter()
        .map(|&(path, code)| pair_step_f32(center, inner, path, code, lr, scratch))
        .sum()
}

/// [`pair_step`] specialized to f32, with the loss accumulated in f64.
/// Portable build of the kernel.
pub(crate) fn pair_step_f32(
    center: &mut [f32],
    inner: &mut [f32],
    path: &[u32],
    code: &[u8],
    lr: f32,
    scratch: &mut [f32],
) -> f64 {
    step_body(center, inner, path, code, lr, scratch, dot, |g, c, u, s| {
        for ((s, ui), &c) in s.iter_mut().zip(u.iter_mut()).zip(c) {
            *s += g * *ui;
            *ui += g * c;
        }
    })
}

/// `e^x` for f32 without a library call, so the vector registers held by the
/// kernels survive the node loop. Cody-Waite range reduction followed by a
/// degree-6 polynomial; relative error about 1e-7. Saturates outside
/// `[-87, 88]`.
#[inline(always)]
pub(crate) fn exp_f32(x: f32) -> f32 {
    let x = x.clamp(-87.0, 88.0);
    let n = (x * std::f32::consts::LOG2_E).round();
    // ln 2 split so that n * LN2_HI is exact.
    let r = x - n * 0.693_359_4 + n * 2.121_944_4e-4;
    let mut p = 1.987_569_1e-4f32;
    for c in [1.398_199_9e-3, 8.333_452e-3, 4.166_579_6e-2, 1.666_666_5e-1, 5.000_000_1e-1] {
        p = p * r + c;
    }
    let y = p * r * r + r + 1.0;
    y * f32::from_bits(((n as i32 + 127) as u32) << 23)
}

#[inline(always)]
fn sigmoid_f32(x: f32) -> f32 {
    1.0 / (1.0 + exp_f32(-x))
}

/// Paths up to this depth have all their dot products issued before any
/// update. Within one pair every dot product reads the unchanged center and
/// a distinct row, so this only reorders independent work.
const MAX_BATCHED_DEPTH: usize = 48;

/// Shared node loop. `update(g, center, u, scratch)` must perform
/// `scratch += g·u; u += g·center` elementwise.
#[inline(always)]
fn step_body(
    center: &mut [f32],
    inner: &mut [f32],
    path: &[u32],
    code: &[u8],
    lr: f32,
    scratch: &mut [f32],
    dot: impl Fn(&[f32], &[f32]) -> f32,
    update: impl Fn(f32, &[f32], &mut [f32], &mut [f32]),
) -> f64 {
    let dim = center.len();
    let scratch = &mut scratch[..dim];
    scratch.fill(0.0);
    // Product of the taken-branch probabilities, folded into `loss` before
    // it can underflow: one logarithm per pair instead of one per node.
    let mut prob = 1.0f64;
    let mut loss = 0.0f64;
    let mut taken_branch = |p: f32, bit: u8| {
        let taken = if bit == 0 { p } else { 1.0 - p };
        prob *= f64::from(taken.max(f32::MIN_POSITIVE));
        if prob < 1e-250 {
            loss -= prob.ln();
            prob = 1.0;
        }
        lr * (f32::from(1 - bit) - p)
    };
    if path.len() <= MAX_BATCHED_DEPTH {
        let mut scale = [0.0f32; MAX_BATCHED_DEPTH];
        let scale = &mut scale[..path.len()];
        for (slot, &node) in scale.iter_mut().zip(path) {
            let start = node as usize * dim;
            *slot = dot(center, &inner[start..start + dim]);
        }
        for slot in scale.iter_mut() {
            *slot = sigmoid_f32(*slot);
        }
        for (slot, &bit) in scale.iter_mut().zip(code) {
            *slot = taken_branch(*slot, bit);
        }
        for (&g, &node) in scale.iter().zip(path) {
            let start = node as usize * dim;
            update(g, center, &mut inner[start..start + dim], scratch);
        }
    } else {
        for (&node, &bit) in path.iter().zip(code) {
            let start = node as usize * dim;
            let u = &mut inner[start..start + dim];
            let g = taken_branch(sigmoid_f32(dot(center, u)), bit);
            update(g, center, u, scratch);
        }
    }
    for (c, s) in center.iter_mut().zip(scratch.iter()) {
        *c += *s;
    }
    loss - prob.ln()
}

#[cfg(target_arch = "x86_64")]
mod simd {
    use std::arch::x86_64::*;

    use super::step_body;

    use super::{Contexts, MAX_BATCHED_DEPTH};

    #[target_feature(enable = "avx512f,fma")]
    pub(super) unsafe fn window_avx512(
        c: &mut [f32],
        i: &mut [f32],
        w: &Contexts<'_>,
        lr: f32,
        s: &mut [f32],
    ) -> f64 {
        macro_rules! by_chunks {
            ($($n:literal)*) => {
                match c.len().div_ceil(16) {
                    $($n => return in_registers::<$n>(c, i, w, lr),)*
                    _ => {}
                }
            };
        }
        by_chunks!(1 2 3 4 5 6 7 8 9 10 11 12 13 14 15 16);
        w.iter()
            .map(|&(p, b)| step_body(c, i, p, b, lr, s, |x, y| dot512(x, y), |g, c, u, s| update512(g, c, u, s)))
            .sum()
    }

    #[target_feature(enable = "avx2,fma")]
    pub(super) unsafe fn window_avx2(c: &mut [f32], i: &mut [f32], w: &Contexts<'_>, lr: f32, s: &mut [f32]) -> f64 {
        w.iter()
            .map(|&(p, b)| step_body(c, i, p, b, lr, s, |x, y| dot256(x, y), |g, c, u, s| update256(g, c, u, s)))
            .sum()
    }

    /// Kernel for `dim <= 16 * C` holding the center vector and its
    /// pending gradient in `2 * C` zmm registers across the whole window.
    #[target_feature(enable = "avx512f,fma")]
    fn in_registers<const C: usize>(center: &mut [f32], inner: &mut [f32], contexts: &Contexts<'_>, lr: f32) -> f64 {
        let dim = center.len();
        debug_assert!(dim.div_ceil(16) == C);
        let mask = |k: usize| tail_mask(dim - 16 * k);
        let mut cv = [_mm512_setzero_ps(); C];
        // SAFETY (all blocks below): lane `16k + j` is touched only when it
        // is below `dim`, and every row slice has length `dim`.
        for k in 0..C {
            cv[k] = unsafe { _mm512_maskz_loadu_ps(mask(k), center.as_ptr().add(16 * k)) };
        }
        let mut total = 0.0f64;
        // Per-node dot products, then gradient scales; see MAX_BATCHED_DEPTH.
        let mut scale = [0.0f32; MAX_BATCHED_DEPTH];
        for &(path, code) in contexts {
            let mut sv = [_mm512_setzero_ps(); C];
            let mut prob = 1.0f64;
            let batched = path.len() <= MAX_BATCHED_DEPTH;
            if batched {
                for (slot, &node) in scale.iter_mut().zip(path) {
                    let start = node as usize * dim;
                    let pu = inner[start..start + dim].as_ptr();
                    let mut acc = [_mm512_setzero_ps(); 4];
                    for k in 0..C {
                        let uv = unsafe { _mm512_maskz_loadu_ps(mask(k), pu.add(16 * k)) };
                        acc[k & 3] = _mm512_fmadd_ps(cv[k], uv, acc[k & 3]);
                    }
                    let sum = _mm512_add_ps(_mm512_add_ps(acc[0], acc[1]), _mm512_add_ps(acc[2], acc[3]));
                    *slot = _mm512_reduce_add_ps(sum);
                }
                for slot in &mut scale[..path.len()] {
                    *slot = super::sigmoid_f32(*slot);
                }
                for (slot, &bit) in scale.iter_mut().zip(code) {
                    let p = *slot;
                    let taken = if bit == 0 { p } else { 1.0 - p };
                    prob *= f64::from(taken.max(f32::MIN_POSITIVE));
                    if prob < 1e-250 {
                        total -= prob.ln();
                        prob = 1.0;
                    }
                    *slot = lr * (f32::from(1 - bit) - p);
                }
                for (&g, &node) in scale.iter().zip(path) {
                    let start = node as usize * dim;
                    let pu = inner[start..start + dim].as_mut_ptr();
                    let g = _mm512_set1_ps(g);
                    for k in 0..C {
                        let uv = unsafe { _mm512_maskz_loadu_ps(mask(k), pu.add(16 * k)) };
                        sv[k] = _mm512_fmadd_ps(g, uv, sv[k]);
                        unsafe { _mm512_mask_storeu_ps(pu.add(16 * k), mask(k), _mm512_fmadd_ps(g, cv[k], uv)) };
                    }
                }
            }
            for (&node, &bit) in path.iter().zip(code).filter(|_| !batched) {
                let start = node as usize * dim;
                let pu = inner[start..start + dim].as_mut_ptr();
                let mut uv = [_mm512_setzero_ps(); C];
                let mut acc = [_mm512_setzero_ps(); 4];
                for k in 0..C {
                    uv[k] = unsafe { _mm512_maskz_loadu_ps(mask(k), pu.add(16 * k)) };
                    acc[k & 3] = _mm512_fmadd_ps(cv[k], uv[k], acc[k & 3]);
                }
                let sum = _mm512_add_ps(_mm512_add_ps(acc[0], acc[1]), _mm512_add_ps(acc[2], acc[3]));
                let p = super::sigmoid_f32(_mm512_reduce_add_ps(sum));
                let taken = if bit == 0 { p } else { 1.0 - p };
                prob *= f64::from(taken.max(f32::MIN_POSITIVE));
                if prob < 1e-250 {
                    total -= prob.ln();
                    prob = 1.0;
                }
                let g = _mm512_set1_ps(lr * (f32::from(1 - bit) - p));
                for k in 0..C {
                    sv[k] = _mm512_fmadd_ps(g, uv[k], sv[k]);
                    unsafe { _mm512_mask_storeu_ps(pu.add(16 * k), mask(k), _mm512_fmadd_ps(g, cv[k], uv[k])) };
                }
            }
            total -= prob.ln();
            for k in 0..C {
                cv[k] = _mm512_add_ps(cv[k], sv[k]);
            }
        }
        for k in 0..C {
            unsafe { _mm512_mask_storeu_ps(center.as_mut_ptr().add(16 * k), mask(k), cv[k]) };
        }
        total
    }

    #[inline]
    fn tail_mask(rem: usize) -> __mmask16 {
        if rem >= 16 {
            0xffff
        } else {
            ((1u32 << rem) - 1) as __mmask16
        }
    }

    #[inline]
    #[target_feature(enable = "avx512f,fma")]
    fn dot512(a: &[f32], b: &[f32]) -> f32 {
        let n = a.len().min(b.len());
        let (pa, pb) = (a.as_ptr(), b.as_ptr());
        let mut acc = [_mm512_setzero_ps(); 4];
        let mut i = 0;
        let mut lane = 0;
        // SAFETY: every load reads lanes below `n`, masked at the tail.
        unsafe {
            while i < n {
                let m = tail_mask(n - i);
                let x = _mm512_maskz_loadu_ps(m, pa.add(i));
                let y = _mm512_maskz_loadu_ps(m, pb.add(i));
                acc[lane] = _mm512_fmadd_ps(x, y, acc[lane]);
                lane = (lane + 1) & 3;
                i += 16;
            }
        }
        _mm512_reduce_add_ps(_mm512_add_ps(_mm512_add_ps(acc[0], acc[1]), _mm512_add_ps(acc[2], acc[3])))
    }

    #[inline]
    #[target_feature(enable = "avx512f,fma")]
    fn update512(g: f32, center: &[f32], u: &mut [f32], s: &mut [f32]) {
        let n = center.len().min(u.len()).min(s.len());
        let (pc, pu, ps) = (center.as_ptr(), u.as_mut_ptr(), s.as_mut_ptr());
        let gv = _mm512_set1_ps(g);
        let mut i = 0;
        // SAFETY: lanes at or past `n` are masked off.
        unsafe {
            while i < n {
                let m = tail_mask(n - i);
                let uv = _mm512_maskz_loadu_ps(m, pu.add(i));
                let sv = _mm512_maskz_loadu_ps(m, ps.add(i));
                let cv = _mm512_maskz_loadu_ps(m, pc.add(i));
                _mm512_mask_storeu_ps(ps.add(i), m, _mm512_fmadd_ps(gv, uv, sv));
                _mm512_mask_storeu_ps(pu.add(i), m, _mm512_fmadd_ps(gv, cv, uv));
                i += 16;
            }
        }
    }

    #[inline]
    #[target_feature(enable = "avx2,fma")]
    fn dot256(a: &[f32], b: &[f32]) -> f32 {
        let n = a.len().min(b.len());
        let (pa, pb) = (a.as_ptr(), b.as_ptr());
        let mut acc = [_mm256_setzero_ps(); 4];
        let mut i = 0;
        let mut lane = 0;
        // SAFETY: full 8-lane loads only while `i + 8 <= n`.
        unsafe {
            while i + 8 <= n {
                let x = _mm256_loadu_ps(pa.add(i));
                let y = _mm256_loadu_ps(pb.add(i));
                acc[lane] = _mm256_fmadd_ps(x, y, acc[lane]);
                lane = (lane + 1) & 3;
                i += 8;
            }
        }
        let v = _mm256_add_ps(_mm256_add_ps(acc[0], acc[1]), _mm256_add_ps(acc[2], acc[3]));
        let h = _mm_add_ps(_mm256_castps256_ps128(v), _mm256_extractf128_ps::<1>(v));
        let h = _mm_add_ps(h, _mm_movehl_ps(h, h));
        let h = _mm_add_ss(h, _mm_shuffle_ps::<1>(h, h));
        let mut total = _mm_cvtss_f32(h);
        for k in i..n {
            total += a[k] * b[k];
        }
        total
    }

    #[inline]
    #[target_feature(enable = "avx2,fma")]
    fn update256(g: f32, center: &[f32], u: &mut [f32], s: &mut [f32]) {
        let n = center.len().min(u.len()).min(s.len());
        let (pc, pu, ps) = (center.as_ptr(), u.as_mut_ptr(), s.as_mut_ptr());
        let gv = _mm256_set1_ps(g);
        let mut i = 0;
        // SAFETY: full 8-lane accesses only while `i + 8 <= n`.
        unsafe {
            while i + 8 <= n {
                let uv = _mm256_loadu_ps(pu.add(i));
                let sv = _mm256_loadu_ps(ps.add(i));
                let cv = _mm256_loadu_ps(pc.add(i));
                _mm256_storeu_ps(ps.add(i), _mm256_fmadd_ps(gv, uv, sv));
                _mm256_storeu_ps(pu.add(i), _mm256_fmadd_ps(gv, cv, uv));
                i += 8;
            }
        }
        for k in i..n {
            s[k] = g.mul_add(u[k], s[k]);
            u[k] = g.mul_add(center[k], u[k]);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn toy(seed: u64) -> (Vec<f64>, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let center = (0..5).map(|_| rng.random_range(-1.0..1.0)).collect();
        let inner = (0..15).map(|_| rng.random_range(-1.0..1.0)).collect();
        (center, inner)
    }

    #[test]
    fn loss_matches_naive_formula() {
        let (center, inner) = toy(3);
        let path = [2, 0];
        let code = [1, 0];
        let naive: f64 = path
            .iter()
            .zip(code)
            .map(|(&n, b)| {
                let f: f64 = (0..5).map(|k| center[k] * inner[n as usize * 5 + k]).sum();
                let s = if b == 0 { f } else { -f };
                -(1.0 / (1.0 + (-s).exp())).ln()
            })
            .sum();
        assert!((pair_loss(&center, &inner, &path, &code) - naive).abs() < 1e-12);
    }

    #[test]
    fn step_is_negative_gradient() {
        let (mut center, mut inner) = toy(7);
        let path = [2, 1, 0];
        let code = [0, 1, 1];
        let grad = pair_gradient(&center, &inner, &path, &code);
        let (c0, i0) = (center.clone(), inner.clone());
        let lr = 0.05;
        let mut scratch = vec![0.0; 5];
        let loss = pair_step(&mut center, &mut inner, &path, &code, lr, &mut scratch);
        assert!((loss - pair_loss(&c0, &i0, &path, &code)).abs() < 1e-12);
        for k in 0..5 {
            assert!((center[k] - (c0[k] - lr * grad.center[k])).abs() < 1e-12);
        }
        for (node, g) in &grad.inner {
            for k in 0..5 {
                let idx = *node as usize * 5 + k;
                assert!((inner[idx] - (i0[idx] - lr * g[k])).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn stable_for_large_scores() {
        let center = [100.0f32];
        let inner = [100.0f32];
        assert!(pair_loss(&center, &inner, &[0], &[1]).is_finite());
        assert!(pair_loss(&center, &inner, &[0], &[0]) >= 0.0);
    }

    #[test]
    fn dot_handles_remainders() {
        let a: Vec<f64> = (0..19).map(f64::from).collect();
        let expected: f64 = a.iter().map(|x| x * x).sum();
        assert_eq!(dot(&a, &a), expected);
    }

    #[test]
    fn f32_kernels_agree_with_generic_step() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let dim = 37;
        let center: Vec<f32> = (0..dim).map(|_| rng.random_range(-0.5..0.5)).collect();
        let inner: Vec<f32> = (0..dim * 6).map(|_| rng.random_range(-0.5..0.5)).collect();
        let (path, code) = ([4, 0, 5, 2], [1, 0, 0, 1]);
        let (mut c_ref, mut i_ref) = (center.clone(), inner.clone());
        let mut scratch = vec![0.0f32; dim];
        let loss_ref = pair_step(&mut c_ref, &mut i_ref, &path, &code, 0.1, &mut scratch);
        for kernel in [window_portable as WindowFn, window_kernel()] {
            let (mut c, mut i) = (center.clone(), inner.clone());
            let loss = kernel(&mut c, &mut i, &[(&path, &code)], 0.1, &mut scratch);
            assert!((loss - f64::from(loss_ref)).abs() < 1e-5);
            for (a, b) in c.iter().chain(&i).zip(c_ref.iter().chain(&i_ref)) {
                assert!((a - b).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn loss_survives_underflow() {
        // Every node assigns ~e^-100 to the taken branch.
        let dim = 1;
        let center = vec![10.0f32];
        let inner = vec![10.0f32; 8];
        let (path, code) = ([0u32, 1, 2, 3, 4, 5, 6, 7], [1u8; 8]);
        let expected = pair_loss(&center, &inner, &path, &code);
        let (mut c, mut i) = (center.clone(), inner.clone());
        let loss = pair_step_f32(&mut c, &mut i, &path, &code, 0.0, &mut vec![0.0; dim]);
        assert!(loss.is_finite() && loss > 100.0, "{loss} vs {expected}");
    }

    #[test]
    fn window_kernels_match_sequential_pair_steps() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for dim in [1, 5, 16, 37, 200, 300] {
            let center: Vec<f32> = (0..dim).map(|_| rng.random_range(-0.5..0.5)).collect();
            let inner: Vec<f32> = (0..dim * 6).map(|_| rng.random_range(-0.5..0.5)).collect();
            let paths: [(&[u32], &[u8]); 3] = [(&[0, 2, 5], &[1, 0, 1]), (&[0, 1], &[0, 0]), (&[0, 2, 4, 3], &[1, 1, 0, 1])];
            let (mut c_ref, mut i_ref) = (center.clone(), inner.clone());
            let mut scratch = vec![0.0f32; dim];
            let loss_ref: f32 = paths
                .iter()
                .map(|(p, b)| pair_step(&mut c_ref, &mut i_ref, p, b, 0.05, &mut scratch))
                .sum();
            for kernel in [window_portable as WindowFn, window_kernel()] {
                let (mut c, mut i) = (center.clone(), inner.clone());
                let loss = kernel(&mut c, &mut i, &paths, 0.05, &mut scratch);
                assert!((loss - f64::from(loss_ref)).abs() < 1e-4, "dim {dim}");
                for (a, b) in c.iter().chain(&i).zip(c_ref.iter().chain(&i_ref)) {
                    assert!((a - b).abs() < 1e-5, "dim {dim}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn inline_exp_is_accurate() {
        let mut x = -87.0f32;
        while x < 88.0 {
            let rel = ((exp_f32(x) - x.exp()) / x.exp()).abs();
            assert!(rel < 5e-7, "exp({x}): relative error {rel}");
            x += 0.0137;
        }
        assert_eq!(exp_f32(0.0), 1.0);
        assert!(exp_f32(-1000.0) > 0.0 && exp_f32(1000.0).is_finite());
    }
}
