//! Derivative-free maximization over a box: golden-section line searches,
//! cycling over coordinates and then over learned ridge directions,
//! restarted from a fixed Halton set.

/// Budget and tolerance for [`maximize_box`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchSettings {
    /// Width at which a golden-section bracket stops shrinking.
    pub tolerance: f64,
    pub max_iterations: usize,
    pub sweeps: usize,
    pub multistarts: usize,
}

impl Default for SearchSettings {
    fn default() -> Self {
        Self {
            tolerance: 1e-8,
            max_iterations: 200,
            sweeps: 10,
            multistarts: 5,
        }
    }
}

/// One search coordinate. Strictly positive boxes are searched on the log
/// scale so the tolerance is relative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bound {
    pub lower: f64,
    pub upper: f64,
}

impl Bound {
    pub fn new(lower: f64, upper: f64) -> Self {
        Self { lower, upper }
    }

    fn log_scale(&self) -> bool {
        self.lower > 0.0
    }

    fn to_search(&self, x: f64) -> f64 {
        if self.log_scale() {
            x.ln()
        } else {
            x
        }
    }

    fn from_search(&self, s: f64) -> f64 {
        let x = if self.log_scale() { s.exp() } else { s };
        x.clamp(self.lower, self.upper)
    }

    fn search_interval(&self) -> (f64, f64) {
        (self.to_search(self.lower), self.to_search(self.upper))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Maximum {
    pub argmax: Vec<f64>,
    pub value: f64,
    /// Indices of coordinates that ended within tolerance of a bound.
    pub at_bound: Vec<usize>,
    pub evaluations: usize,
}

const PRIMES: [u32; 8] = [2, 3, 5, 7, 11, 13, 17, 19];

fn radical_inverse(mut i: u32, base: u32) -> f64 {
    let mut result = 0.0;
    let mut f = 1.0 / base as f64;
    while i > 0 {
        result += f * (i % base) as f64;
        i /= base;
        f /= base as f64;
    }
    result
}

/// Point `index` (1-based) of the Halton sequence in `dim` dimensions.
pub fn halton(index: u32, dim: usize) -> Vec<f64> {
    assert!(dim <= PRIMES.len(), "halton supports up to {} dimensions", PRIMES.len());
    PRIMES[..dim]
        .iter()
        .map(|&p| radical_inverse(index, p))
        .collect()
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section maximization of `f` on `[a, b]`.
pub fn golden_section<F: FnMut(f64) -> f64>(
    mut f: F,
    mut a: f64,
    mut b: f64,
    tolerance: f64,
    max_iterations: usize,
) -> (f64, f64, usize) {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut evaluations = 2;
    for _ in 0..max_iterations {
        if (b - a).abs() <= tolerance {
            break;
        }
        // NaN compares false, so a NaN on the right moves the bracket left.
        if fc >= fd || fd.is_nan() {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
        evaluations += 1;
    }
    if fc >= fd || fd.is_nan() {
        (c, fc, evaluations)
    } else {
        (d, fd, evaluations)
    }
}

fn norm_sq(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

/// Golden-section search along `direction` from `origin` (search units),
/// over `|t| ≤ reach` clipped to the box. Returns the new point in search
/// units, its value and the evaluation count.
fn line_search<F: FnMut(&[f64]) -> f64>(
    f: &mut F,
    bounds: &[Bound],
    origin: &[f64],
    direction: &[f64],
    reach: f64,
    settings: SearchSettings,
) -> (Vec<f64>, f64, usize) {
    let (mut t_lo, mut t_hi) = (-reach, reach);
    for ((&o, &d), b) in origin.iter().zip(direction).zip(bounds) {
        if d == 0.0 {
            continue;
        }
        let (lo, hi) = b.search_interval();
        let (a, c) = ((lo - o) / d, (hi - o) / d);
        t_lo = t_lo.max(a.min(c));
        t_hi = t_hi.min(a.max(c));
    }
    let at = |t: f64| -> Vec<f64> {
        origin
            .iter()
            .zip(direction)
            .zip(bounds)
            .map(|((&o, &d), b)| {
                let (lo, hi) = b.search_interval();
                (o + t * d).clamp(lo, hi)
            })
            .collect()
    };
    let to_point = |y: &[f64]| -> Vec<f64> { y.iter().zip(bounds).map(|(&s, b)| b.from_search(s)).collect() };
    if !(t_lo < t_hi) {
        return (origin.to_vec(), f64::NEG_INFINITY, 0);
    }
    let (t, v, evals) = golden_section(
        |t| f(&to_point(&at(t))),
        t_lo,
        t_hi,
        settings.tolerance,
        settings.max_iterations,
    );
    (at(t), v, evals)
}

/// Maximizes `f` over the box.
///
/// Each start runs up to `sweeps` sweeps of golden-section line searches in
/// the search coordinates. The first sweep runs along the coordinate axes
/// over the whole box; each sweep's net displacement is then searched and
/// replaces the direction that gained most, so later sweeps follow tilted
/// ridges. Later sweeps bracket four times the previous sweep's largest move.
/// A start stops once a sweep moves less than the tolerance or no longer
/// improves the value. Starts are Halton points mapped into
/// the box, followed by any caller-supplied `extra_starts` (clamped into the
/// box). The best value wins; values within 1e-10 of each other prefer the
/// smaller Euclidean norm, and otherwise the earlier start.
pub fn maximize_box<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    bounds: &[Bound],
    settings: SearchSettings,
    extra_starts: &[Vec<f64>],
) -> Maximum {
    let dim = bounds.len();
    if dim == 0 {
        return Maximum {
            argmax: Vec::new(),
            value: f(&[]),
            at_bound: Vec::new(),
            evaluations: 1,
        };
    }

    let mut evaluations = 0;
    let mut best: Option<(Vec<f64>, f64)> = None;
    let halton_starts = (0..settings.multistarts.max(1)).map(|start| {
        let unit = halton(start as u32 + 1, dim);
        bounds
            .iter()
            .zip(&unit)
            .map(|(b, &u)| {
                let (lo, hi) = b.search_interval();
                b.from_search(lo + u * (hi - lo))
            })
            .collect::<Vec<f64>>()
    });
    let extra = extra_starts.iter().map(|x| {
        assert_eq!(x.len(), dim, "start point dimension");
        x.iter()
            .zip(bounds)
            .map(|(&v, b)| v.clamp(b.lower, b.upper))
            .collect::<Vec<f64>>()
    });
    let to_point = |y: &[f64]| -> Vec<f64> { y.iter().zip(bounds).map(|(&s, b)| b.from_search(s)).collect() };
    for start in halton_starts.chain(extra) {
        let mut y: Vec<f64> = start.iter().zip(bounds).map(|(&x, b)| b.to_search(x)).collect();
        let mut value = f(&start);
        evaluations += 1;

        // Search directions, starting from the coordinate axes. After each
        // sweep the net displacement replaces the direction that gained most.
        let mut directions: Vec<Vec<f64>> = (0..dim)
            .map(|i| (0..dim).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        // bracket half-width in search units; the first sweep spans the box
        let mut reach = f64::INFINITY;
        for _ in 0..settings.sweeps {
            let sweep_start = y.clone();
            let value_at_start = value;
            let mut biggest_gain = (0, 0.0);
            for (i, d) in directions.iter().enumerate() {
                let (candidate, v, evals) = line_search(&mut f, bounds, &y, d, reach, settings);
                evaluations += evals;
                if v > value {
                    if v - value > biggest_gain.1 {
                        biggest_gain = (i, v - value);
                    }
                    y = candidate;
                    value = v;
                }
            }
            let step: Vec<f64> = y.iter().zip(&sweep_start).map(|(a, b)| a - b).collect();
            let moved = step.iter().fold(0.0f64, |m, s| m.max(s.abs()));
            // a single coordinate is already optimal after one full-range search
            if moved <= settings.tolerance || dim == 1 {
                break;
            }
            let direction: Vec<f64> = step.iter().map(|s| s / moved).collect();
            let (candidate, v, evals) = line_search(&mut f, bounds, &y, &direction, 4.0 * moved, settings);
            evaluations += evals;
            if v > value {
                y = candidate;
                value = v;
            }
            directions.remove(biggest_gain.0);
            directions.push(direction);
            if value - value_at_start <= 1e-12 * (1.0 + value.abs()) {
                break;
            }
            let displacement = y
                .iter()
                .zip(&sweep_start)
                .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            reach = (4.0 * displacement).max(100.0 * settings.tolerance);
        }
        let point = to_point(&y);

        let replace = match &best {
            None => true,
            Some((bx, bv)) => {
                if (value - bv).abs() < 1e-10 {
                    norm_sq(&point) < norm_sq(bx)
                } else {
                    value > *bv
                }
            }
        };
        if replace {
            best = Some((point, value));
        }
    }

    let (argmax, value) = best.expect("at least one start");
    let at_bound = argmax
        .iter()
        .zip(bounds)
        .enumerate()
        .filter(|(_, (&x, b))| {
            let s = b.to_search(x);
            let (lo, hi) = b.search_interval();
            (s - lo).abs() <= 10.0 * settings.tolerance || (hi - s).abs() <= 10.0 * settings.tolerance
        })
        .map(|(i, _)| i)
        .collect();
    Maximum {
        argmax,
        value,
        at_bound,
        evaluations,
    }
}
