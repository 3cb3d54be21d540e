//! The twin height functions phi and phi-tilde: both peak at exactly 1 on
//! the graph of the extended data, phi-tilde stays strictly below 1 on the
//! part of the graph inside the window, and the two agree - bitwise - off
//! the window. Their fiber-slot derivative is uniformly below 1/2.

use crate::error::{CoreError, Result};
use crate::extract::extension::SmoothExtension;
use crate::extract::window::Window;
use crate::gauges::SmoothStep;
use crate::seqspace::{ProductPoint, SparseVec};

/// Which of the twins drives a map: the primary one (peaks on the whole
/// graph) or the windowed one (peaks only off the window).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TwinKind {
    Primary,
    Windowed,
}

/// The validated constant schedule. For a closeness budget e <= 1:
/// a_n = e 4^-n, b_n = 2 a_n, c_n = e 16^-n, eps_n = e 16^-(n+1), and d_n is
/// the exact peak slope (4/3) 4^-n of the flat-topped profile.
#[derive(Debug, Clone)]
pub struct TwinSchedule {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub d: Vec<f64>,
    pub eps_n: Vec<f64>,
    pub d_star: f64,
    pub closeness: f64,
}

impl TwinSchedule {
    pub fn new(closeness: f64, terms: usize) -> Result<TwinSchedule> {
        if !(closeness > 0.0 && closeness <= 1.0) {
            return Err(CoreError::Schedule {
                detail: format!("closeness budget must lie in (0, 1], got {closeness}"),
            });
        }
        let e = closeness;
        let mut a = Vec::new();
        let mut b = Vec::new();
        let mut c = Vec::new();
        let mut d = Vec::new();
        let mut eps_n = Vec::new();
        for n in 1..=terms {
            let p2 = 2f64.powi(-2 * n as i32);
            let p4 = 2f64.powi(-4 * n as i32);
            a.push(e * p2);
            b.push(2.0 * e * p2);
            c.push(e * p4);
            eps_n.push(e * p4 / 16.0);
            d.push((4.0 / 3.0) * p2);
        }
        let schedule = TwinSchedule {
            d_star: c.iter().sum(),
            a,
            b,
            c,
            d,
            eps_n,
            closeness: e,
        };
        schedule.validate()?;
        Ok(schedule)
    }

    fn validate(&self) -> Result<()> {
        let n = self.a.len();
        for i in 0..n {
            if !(self.a[i] < self.b[i]) {
                return Err(CoreError::Schedule {
                    detail: format!("a_{} >= b_{}", i + 1, i + 1),
                });
            }
            if i + 1 < n && self.eps_n[i + 1] + self.b[i + 1] >= self.a[i] - self.eps_n[i] {
                return Err(CoreError::Schedule {
                    detail: format!("separation fails between levels {} and {}", i + 1, i + 2),
                });
            }
        }
        let c_sum: f64 = self.c.iter().sum();
        if c_sum > 0.5 * self.closeness {
            return Err(CoreError::Schedule {
                detail: format!("sum of plateau heights {c_sum} exceeds half the budget"),
            });
        }
        let d_sum: f64 = self.d.iter().sum();
        if d_sum > 0.5 {
            return Err(CoreError::Schedule {
                detail: format!("sum of slope bounds {d_sum} exceeds 1/2"),
            });
        }
        Ok(())
    }
}

struct TwinLevel {
    approx: SmoothExtension,
    profile: SmoothStep,
    height: f64,
    /// Window blend: 1 at small graph margins, 0 at large ones.
    lambda: SmoothStep,
}

pub struct TwinHeights {
    schedule: TwinSchedule,
    levels: Vec<TwinLevel>,
    window: Window,
    base: SmoothExtension,
}

impl TwinHeights {
    pub fn build(
        samples: &[(SparseVec, SparseVec)],
        base: SmoothExtension,
        window: Window,
        closeness: f64,
        terms: usize,
        corpus: &[SparseVec],
    ) -> Result<TwinHeights> {
        let schedule = TwinSchedule::new(closeness, terms)?;
        let mut levels = Vec::with_capacity(terms);
        // Window thresholds t_n = 2 (eps_n + b_n), decreasing with n.
        let t: Vec<f64> = (0..terms)
            .map(|i| 2.0 * (schedule.eps_n[i] + schedule.b[i]))
            .collect();
        for i in 0..terms {
            let approx = certify_to(samples, &base, corpus, schedule.eps_n[i])?;
            let profile = SmoothStep::falling(schedule.a[i], schedule.b[i])?;
            let t_prev = if i == 0 { 2.0 * t[0] } else { t[i - 1] };
            let lambda = SmoothStep::falling(t[i], t_prev)?;
            levels.push(TwinLevel {
                approx,
                profile,
                height: schedule.c[i],
                lambda,
            });
        }
        Ok(TwinHeights {
            schedule,
            levels,
            window,
            base,
        })
    }

    pub fn schedule(&self) -> &TwinSchedule {
        &self.schedule
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    /// Margin of the window along the graph over x1.
    fn graph_margin(&self, x1: &SparseVec) -> f64 {
        if self.window.base_only() {
            self.window
                .margin(&ProductPoint::new(x1.clone(), SparseVec::zero()))
        } else {
            self.window
                .margin(&ProductPoint::new(x1.clone(), self.base.eval(x1)))
        }
    }

    /// Height at a point for the requested twin. Terms are accumulated in
    /// level order; off the window every factor is exactly 1 or multiplies
    /// an exact zero, so the twins agree bitwise there.
    fn raw_height(&self, p: &ProductPoint, kind: TwinKind) -> f64 {
        let margin = match kind {
            TwinKind::Primary => 0.0,
            TwinKind::Windowed => self.graph_margin(&p.x1),
        };
        let mut acc = 0.0;
        for level in &self.levels {
            let r = SparseVec::dist_l2(&p.x2, &level.approx.eval(&p.x1));
            // `profile` is shaped on [a_n, b_n] with unit plateau; scale to c_n.
            let mut term = level.height * level.profile.eval(r);
            if kind == TwinKind::Windowed {
                term *= level.lambda.eval(margin);
            }
            acc += term;
        }
        acc
    }

    /// phi (primary) or phi-tilde (windowed): 1 exactly where every profile
    /// sits on its plateau, i.e. on the graph (minus the window for the
    /// windowed twin).
    pub fn eval(&self, p: &ProductPoint, kind: TwinKind) -> f64 {
        1.0 - (self.schedule.d_star - self.raw_height(p, kind))
    }

    /// Fiber-slot gradient of the twin.
    pub fn grad_x2(&self, p: &ProductPoint, kind: TwinKind) -> SparseVec {
        let margin = match kind {
            TwinKind::Primary => 0.0,
            TwinKind::Windowed => self.graph_margin(&p.x1),
        };
        let mut acc = SparseVec::zero();
        for level in &self.levels {
            let center = level.approx.eval(&p.x1);
            let diff = SparseVec::sub(&p.x2, &center);
            let r = diff.norm_l2();
            if r == 0.0 {
                continue; // on the plateau, slope exactly zero
            }
            let mut slope = level.height * level.profile.deriv(r);
            if kind == TwinKind::Windowed {
                slope *= level.lambda.eval(margin);
            }
            if slope != 0.0 {
                acc = SparseVec::add_scaled(slope / r, &diff, &acc);
            }
        }
        acc
    }
}

fn certify_to(
    samples: &[(SparseVec, SparseVec)],
    base: &SmoothExtension,
    corpus: &[SparseVec],
    tol: f64,
) -> Result<SmoothExtension> {
    // At sample points the target value is stored exactly, so arbitrarily
    // small tolerances are verifiable. At off-sample probes the target is
    // itself a rounded weighted mean, which floors what a comparison can
    // resolve; every structural use of the bound sits far above that floor.
    let probe_floor = tol.max(1e-13);
    let is_sample =
        |x: &SparseVec| samples.iter().any(|(p, _)| SparseVec::dist_l2(x, p) == 0.0);
    let mut sigma = 1.0;
    for _ in 0..200 {
        let candidate = SmoothExtension::regularized(samples, sigma)?;
        let ok = corpus.iter().all(|x| {
            let dev = candidate.deviation_at(x, &base.eval(x));
            dev <= if is_sample(x) { tol } else { probe_floor }
        });
        if ok {
            return Ok(candidate);
        }
        sigma *= 0.5;
    }
    Err(CoreError::Certification {
        what: "twin-height approximant",
        tol,
        achieved: f64::NAN,
    })
}
