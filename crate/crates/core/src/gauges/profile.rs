//! The shared C-infinity step profile and its cumulative tables.
//!
//! The base bump is `exp(-1/(s(1-s)))` on (0,1). The step profile used by
//! every transition in the crate is the normalized integral of a *flat-topped*
//! bump (quarter-width ramps glued to a unit plateau), whose peak-to-mean
//! slope ratio is exactly 4/3. A plain bump integral has ratio ~2.6 and would
//! break the slope budgets of the deleting curve and of the twin-function
//! schedule; the flat top is what makes those budgets hold.
//!
//! Tables are cumulative Gauss-Legendre sums on a fixed grid; point
//! evaluation refines from the nearest knot, so plateau values are exact and
//! interior values carry quadrature error near machine precision.

use std::sync::OnceLock;

const GRID: usize = 1024;

// 8-point Gauss-Legendre nodes/weights on [-1, 1] (positive half).
const GL_NODES: [f64; 4] = [
    0.1834346424956498,
    0.525532409916329,
    0.7966664774136267,
    0.9602898564975363,
];
const GL_WEIGHTS: [f64; 4] = [
    0.362683783378362,
    0.3137066458778873,
    0.2223810344533745,
    0.1012285362903763,
];

fn gauss8(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = 0.0;
    for (x, w) in GL_NODES.iter().zip(GL_WEIGHTS.iter()) {
        acc += w * (f(mid + half * x) + f(mid - half * x));
    }
    acc * half
}

fn cumulative_table(f: &dyn Fn(f64) -> f64) -> Vec<f64> {
    let h = 1.0 / GRID as f64;
    let mut knots = Vec::with_capacity(GRID + 1);
    knots.push(0.0);
    let mut acc = 0.0;
    for i in 0..GRID {
        acc += gauss8(f, i as f64 * h, (i + 1) as f64 * h);
        knots.push(acc);
    }
    knots
}

fn table_eval(knots: &[f64], f: &dyn Fn(f64) -> f64, s: f64) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    if s >= 1.0 {
        return knots[GRID];
    }
    let h = 1.0 / GRID as f64;
    let i = ((s / h) as usize).min(GRID - 1);
    knots[i] + gauss8(f, i as f64 * h, s)
}

/// Cumulative profile data, built once per process.
pub struct StepProfile {
    z_bump: f64,
    bump_knots: Vec<f64>,
    z_flat: f64,
    flat_knots: Vec<f64>,
    basic_area_knots: Vec<f64>,
}

fn raw_bump(s: f64) -> f64 {
    if s <= 0.0 || s >= 1.0 {
        0.0
    } else {
        (-1.0 / (s * (1.0 - s))).exp()
    }
}

impl StepProfile {
    fn build() -> StepProfile {
        let bump_knots = cumulative_table(&raw_bump);
        let z_bump = bump_knots[GRID];

        // Basic step I(s) from the raw tables (local closure, pre-normalization).
        let basic = |s: f64| table_eval(&bump_knots, &raw_bump, s) / z_bump;

        let flat = |s: f64| {
            if s <= 0.0 || s >= 1.0 {
                0.0
            } else if s < 0.25 {
                basic(4.0 * s)
            } else if s <= 0.75 {
                1.0
            } else {
                basic(4.0 * (1.0 - s))
            }
        };
        let flat_knots = cumulative_table(&flat);
        let z_flat = flat_knots[GRID];

        let basic_area_knots = cumulative_table(&basic);

        StepProfile {
            z_bump,
            bump_knots,
            z_flat,
            flat_knots,
            basic_area_knots,
        }
    }

    /// The normalized base bump integral I(s): 0 at s<=0, 1 at s>=1.
    pub fn basic_step(&self, s: f64) -> f64 {
        if s <= 0.0 {
            0.0
        } else if s >= 1.0 {
            1.0
        } else {
            table_eval(&self.bump_knots, &raw_bump, s) / self.z_bump
        }
    }

    /// d/ds of `basic_step` (exact: the normalized bump).
    pub fn basic_step_deriv(&self, s: f64) -> f64 {
        raw_bump(s) / self.z_bump
    }

    fn flat_bump(&self, s: f64) -> f64 {
        if s <= 0.0 || s >= 1.0 {
            0.0
        } else if s < 0.25 {
            self.basic_step(4.0 * s)
        } else if s <= 0.75 {
            1.0
        } else {
            self.basic_step(4.0 * (1.0 - s))
        }
    }

    /// The flat-topped step J(s): 0 at s<=0, 1 at s>=1, max slope 4/3.
    pub fn step(&self, s: f64) -> f64 {
        if s <= 0.0 {
            0.0
        } else if s >= 1.0 {
            1.0
        } else {
            let p = self.z_flat;
            let f = |u: f64| self.flat_bump(u);
            table_eval(&self.flat_knots, &f, s) / p
        }
    }

    /// d/ds of `step` (exact: the normalized flat-topped bump).
    pub fn step_deriv(&self, s: f64) -> f64 {
        self.flat_bump(s) / self.z_flat
    }

    /// Peak slope of `step` (attained on the whole plateau of the bump).
    pub fn step_slope_max(&self) -> f64 {
        1.0 / self.z_flat
    }

    /// K(u) = integral of `basic_step` from 0 to u; used by the corner arc
    /// of the smooth square.
    pub fn basic_step_area(&self, u: f64) -> f64 {
        if u <= 0.0 {
            return 0.0;
        }
        let f = |s: f64| self.basic_step(s);
        if u >= 1.0 {
            // I integrates to exactly 1/2 by symmetry; extend linearly.
            return self.basic_area_knots[GRID] + (u - 1.0);
        }
        table_eval(&self.basic_area_knots, &f, u)
    }
}

static PROFILE: OnceLock<StepProfile> = OnceLock::new();

pub fn profile() -> &'static StepProfile {
    PROFILE.get_or_init(StepProfile::build)
}
