//! Globally adaptive Gauss–Kronrod (7/15) integration of vector-valued
//! integrands.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, QuadratureFailure, Result};

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// Stopping rule and budget for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub initial_intervals: usize,
    pub max_intervals: usize,
}

impl QuadOptions {
    pub fn relative(rel_tol: f64) -> Self {
        Self { rel_tol, abs_tol: 0.0, initial_intervals: 32, max_intervals: 20_000 }
    }
}

#[derive(Debug, Clone)]
pub struct QuadResult {
    pub values: Vec<f64>,
    pub errors: Vec<f64>,
    pub intervals: usize,
}

struct Segment {
    a: f64,
    b: f64,
    values: Vec<f64>,
    errors: Vec<f64>,
    priority: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.priority == other.priority
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.priority.total_cmp(&other.priority)
    }
}

fn kronrod<F>(f: &F, a: f64, b: f64, dim: usize, buf: &mut [f64]) -> (Vec<f64>, Vec<f64>)
where
    F: Fn(f64, &mut [f64]),
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut kron = vec![0.0; dim];
    let mut gauss = vec![0.0; dim];
    f(center, buf);
    for i in 0..dim {
        kron[i] = WGK[7] * buf[i];
        gauss[i] = WG[3] * buf[i];
    }
    for j in 0..7 {
        let dx = half * XGK[j];
        f(center - dx, buf);
        let lo = buf.to_vec();
        f(center + dx, buf);
        for i in 0..dim {
            let s = lo[i] + buf[i];
            kron[i] += WGK[j] * s;
            if j % 2 == 1 {
                gauss[i] += WG[j / 2] * s;
            }
        }
    }
    let values: Vec<f64> = kron.iter().map(|k| k * half).collect();
    let errors = kron.iter().zip(&gauss).map(|(k, g)| ((k - g) * half).abs()).collect();
    (values, errors)
}

/// Integrates the `dim` components written by `f(x, out)` over `[a, b]`.
///
/// Subdivides the interval whose error is largest relative to the running
/// totals until every component satisfies
/// `error ≤ max(abs_tol, rel_tol · |value|)`. Running out of intervals is an
/// error carrying the best estimate of the first failing component.
pub fn integrate<F>(f: F, a: f64, b: f64, dim: usize, opts: QuadOptions, context: &str) -> Result<QuadResult>
where
    F: Fn(f64, &mut [f64]),
{
    let mut buf = vec![0.0; dim];
    let n0 = opts.initial_intervals.max(1);
    let width = (b - a) / n0 as f64;
    let mut segments: Vec<Segment> = (0..n0)
        .map(|i| {
            let lo = a + width * i as f64;
            let hi = if i + 1 == n0 { b } else { lo + width };
            let (values, errors) = kronrod(&f, lo, hi, dim, &mut buf);
            Segment { a: lo, b: hi, values, errors, priority: 0.0 }
        })
        .collect();

    let mut totals = vec![0.0; dim];
    let mut errs = vec![0.0; dim];
    for s in &segments {
        for i in 0..dim {
            totals[i] += s.values[i];
            errs[i] += s.errors[i];
        }
    }
    let scale: Vec<f64> = totals
        .iter()
        .map(|t| (opts.rel_tol * t.abs()).max(opts.abs_tol).max(f64::MIN_POSITIVE))
        .collect();
    let priority = |e: &[f64]| e.iter().zip(&scale).map(|(e, s)| e / s).fold(0.0, f64::max);
    for s in &mut segments {
        s.priority = priority(&s.errors);
    }
    let mut heap: BinaryHeap<Segment> = segments.into_iter().collect();
    let mut count = heap.len();

    let converged = |totals: &[f64], errs: &[f64]| {
        totals
            .iter()
            .zip(errs)
            .all(|(t, e)| *e <= (opts.rel_tol * t.abs()).max(opts.abs_tol))
    };
    while !converged(&totals, &errs) {
        if count >= opts.max_intervals {
            let worst = (0..dim)
                .find(|&i| errs[i] > (opts.rel_tol * totals[i].abs()).max(opts.abs_tol))
                .unwrap_or(0);
            return Err(Error::Quadrature(QuadratureFailure {
                context: context.to_string(),
                intervals: count,
                estimate: totals[worst],
                error_estimate: errs[worst],
                tolerance: opts.rel_tol,
            }));
        }
        let seg = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (seg.a + seg.b);
        if !(mid > seg.a && mid < seg.b) {
            // Interval can no longer be split in double precision.
            heap.push(Segment { priority: 0.0, ..seg });
            count = opts.max_intervals;
            continue;
        }
        for i in 0..dim {
            totals[i] -= seg.values[i];
            errs[i] -= seg.errors[i];
        }
        for (lo, hi) in [(seg.a, mid), (mid, seg.b)] {
            let (values, errors) = kronrod(&f, lo, hi, dim, &mut buf);
            for i in 0..dim {
                totals[i] += values[i];
                errs[i] += errors[i];
            }
            let p = priority(&errors);
            heap.push(Segment { a: lo, b: hi, values, errors, priority: p });
        }
        count += 1;
    }
    // Re-add from scratch to shed the drift of incremental updates.
    let mut values = vec![0.0; dim];
    let mut errors = vec![0.0; dim];
    for s in heap.iter() {
        for i in 0..dim {
            values[i] += s.values[i];
            errors[i] += s.errors[i];
        }
    }
    Ok(QuadResult { values, errors, intervals: count })
}
