//! Empirical decay probing and gain tuning.
//!
//! The theory guarantees that large enough (k, g) stabilize the loop but
//! gives no computable threshold, so the tuner escalates empirically: it
//! simulates the unforced closed loop from random unit states and checks
//! that every trajectory decays, doubling k and then g until the probe
//! passes.

use ltv_core::MatrixSignal;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{HighGainParams, StabilizerError};

/// Decay-probe policy: how many random unit initial states to integrate,
/// for how long, and what counts as convincing decay.
#[derive(Clone, Debug)]
pub struct UasProbe {
    pub trials: usize,
    pub horizon: f64,
    pub step: f64,
    pub t0: f64,
    /// The fitted exponent of ln‖x‖ over the second half of the horizon
    /// must stay at or below this (strictly negative) ceiling.
    pub exponent_ceiling: f64,
    /// ‖x(T)‖ must shrink to at most this fraction of ‖x(0)‖ = 1.
    pub shrink_floor: f64,
    pub seed: u64,
}

impl Default for UasProbe {
    fn default() -> Self {
        UasProbe {
            trials: 8,
            horizon: 40.0,
            step: 1e-3,
            t0: 0.0,
            exponent_ceiling: -1e-3,
            shrink_floor: 1e-4,
            seed: 7,
        }
    }
}

/// Worst-case decay over the probe's trials.
#[derive(Clone, Debug)]
pub struct ProbeOutcome {
    pub pass: bool,
    /// Largest (least negative) fitted decay exponent.
    pub worst_exponent: f64,
    /// Largest final-over-initial norm ratio.
    pub worst_shrink: f64,
}

const DIVERGENCE: f64 = 1e12;
const NORM_FLOOR: f64 = 1e-200;

/// One random-initial-state integration: the fitted decay exponent, the
/// final-over-initial norm ratio, and whether both met the policy.
#[derive(Clone, Debug)]
pub struct TrialFit {
    pub exponent: f64,
    pub shrink: f64,
    pub pass: bool,
}

/// Per-trial results behind [`decay_probe`], in draw order: integrate
/// `ẋ = A(t)x` from random unit states and fit the decay of `ln‖x‖`
/// over the second half of the horizon by least squares.
pub fn decay_trials(a: &MatrixSignal, probe: &UasProbe) -> Vec<TrialFit> {
    let n = a.rows();
    assert_eq!(a.cols(), n, "state matrix must be square");
    let steps = (probe.horizon / probe.step).round() as usize;
    let h = probe.step;

    // Pre-sample A on the half-step grid so RK4 stages hit nodes exactly.
    let nodes: Vec<DMatrix<f64>> =
        (0..=2 * steps).map(|j| a.eval(probe.t0 + 0.5 * h * j as f64)).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(probe.seed);
    let sample_stride = ((0.5 / h).round() as usize).max(1);
    let fit_from = probe.t0 + 0.5 * probe.horizon;
    let mut trials = Vec::with_capacity(probe.trials);

    for _ in 0..probe.trials {
        let mut x = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
        let norm = x.norm();
        if norm == 0.0 {
            continue;
        }
        x /= norm;

        let mut samples: Vec<(f64, f64)> = Vec::new();
        let mut diverged = false;
        for k in 0..steps {
            let k1 = &nodes[2 * k] * &x;
            let k2 = &nodes[2 * k + 1] * (&x + 0.5 * h * &k1);
            let k3 = &nodes[2 * k + 1] * (&x + 0.5 * h * &k2);
            let k4 = &nodes[2 * k + 2] * (&x + h * &k3);
            x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            let t = probe.t0 + h * (k + 1) as f64;
            let norm = x.norm();
            if !norm.is_finite() || norm > DIVERGENCE {
                diverged = true;
                break;
            }
            if (k + 1) % sample_stride == 0 && t >= fit_from && norm >= NORM_FLOOR {
                samples.push((t, norm.ln()));
            }
        }
        if diverged {
            trials.push(TrialFit {
                exponent: f64::INFINITY,
                shrink: f64::INFINITY,
                pass: false,
            });
            continue;
        }

        let exponent = if samples.len() < 2 {
            // The state collapsed below the floor before the fit window:
            // decay is beyond doubt.
            f64::NEG_INFINITY
        } else {
            let m = samples.len() as f64;
            let tbar = samples.iter().map(|s| s.0).sum::<f64>() / m;
            let ybar = samples.iter().map(|s| s.1).sum::<f64>() / m;
            let num: f64 = samples.iter().map(|s| (s.0 - tbar) * (s.1 - ybar)).sum();
            let den: f64 = samples.iter().map(|s| (s.0 - tbar).powi(2)).sum();
            num / den
        };
        let shrink = x.norm();
        trials.push(TrialFit {
            exponent,
            shrink,
            pass: exponent <= probe.exponent_ceiling && shrink <= probe.shrink_floor,
        });
    }
    trials
}

/// Integrate `ẋ = A(t)x` from random unit states and reduce the
/// per-trial fits of [`decay_trials`] to the worst case.
pub fn decay_probe(a: &MatrixSignal, probe: &UasProbe) -> ProbeOutcome {
    let mut worst_exponent = f64::NEG_INFINITY;
    let mut worst_shrink: f64 = 0.0;
    for trial in decay_trials(a, probe) {
        worst_exponent = worst_exponent.max(trial.exponent);
        worst_shrink = worst_shrink.max(trial.shrink);
    }
    ProbeOutcome {
        pass: worst_exponent <= probe.exponent_ceiling && worst_shrink <= probe.shrink_floor,
        worst_exponent,
        worst_shrink,
    }
}

/// One tuner iteration: the gains tried and the worst decay they showed
/// across the probed parameter points.
#[derive(Clone, Debug)]
pub struct TuneStep {
    pub k: f64,
    pub g: f64,
    pub worst_exponent: f64,
    pub worst_shrink: f64,
    pub pass: bool,
}

/// Double k, then g, alternating, until the unforced closed loop decays
/// at the origin and at every supplied corner of the parameter box.
///
/// `factory` assembles the unforced closed-loop state matrix for a
/// candidate gain bundle at one parameter point.  The probe's step is
/// shrunk automatically as the gains grow so the explicit integrator
/// stays inside its stability region.
pub fn autotune_gains<F>(
    factory: F,
    start: &HighGainParams,
    corners: &[Vec<f64>],
    max_doublings: usize,
    probe: &UasProbe,
) -> Result<(HighGainParams, Vec<TuneStep>), StabilizerError>
where
    F: Fn(&HighGainParams, &[f64]) -> Result<MatrixSignal, StabilizerError>,
{
    let mu_dim = corners.first().map_or(0, Vec::len);
    let origin = vec![0.0; mu_dim];
    let mut points: Vec<&[f64]> = vec![&origin];
    points.extend(corners.iter().map(Vec::as_slice));

    let d_max = start.d.iter().cloned().fold(1.0_f64, f64::max);
    let mut params = start.clone();
    let mut trail = Vec::new();
    let mut best_exponent = f64::INFINITY;

    for doubling in 0..=max_doublings {
        if doubling > 0 {
            params = if doubling % 2 == 1 {
                params.with_gains(2.0 * params.k.max(f64::MIN_POSITIVE), params.g)?
            } else {
                params.with_gains(params.k, 2.0 * params.g)?
            };
        }
        let mut local = UasProbe { ..probe.clone() };
        local.step = probe
            .step
            .min(1.0 / (params.g * d_max))
            .min(0.25 / params.k.max(1.0));

        let mut worst_exponent = f64::NEG_INFINITY;
        let mut worst_shrink: f64 = 0.0;
        for mu in &points {
            let a_cl = factory(&params, mu)?;
            let outcome = decay_probe(&a_cl, &local);
            worst_exponent = worst_exponent.max(outcome.worst_exponent);
            worst_shrink = worst_shrink.max(outcome.worst_shrink);
        }
        let pass = worst_exponent <= probe.exponent_ceiling && worst_shrink <= probe.shrink_floor;
        trail.push(TuneStep {
            k: params.k,
            g: params.g,
            worst_exponent,
            worst_shrink,
            pass,
        });
        best_exponent = best_exponent.min(worst_exponent);
        if pass {
            return Ok((params, trail));
        }
    }
    Err(StabilizerError::TuneExhausted { best_exponent, doublings: max_doublings })
}
