//! Central finite-difference gradient checking (64-bit).

use super::param::{ParamMut, Parameters};

/// Magnitudes below this are treated as this value in the relative-error
/// denominator, so gradients that are zero up to rounding do not blow up.
pub const RELATIVE_ERROR_FLOOR: f64 = 1e-6;

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(RELATIVE_ERROR_FLOOR)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub max_rel_error: f64,
    /// `name[index]` of the worst element.
    pub worst: String,
    pub checked: usize,
}

impl GradCheckReport {
    pub fn passes(&self, tolerance: f64) -> bool {
        self.max_rel_error < tolerance
    }

    /// Combine reports from several instances, keeping the worst.
    pub fn merge(self, other: GradCheckReport) -> GradCheckReport {
        let checked = self.checked + other.checked;
        let mut worst = if other.max_rel_error > self.max_rel_error { other } else { self };
        worst.checked = checked;
        worst
    }
}

/// Compare the gradients written by `loss_and_backward` against central
/// differences with step `h`, over every element of every parameter.
///
/// `loss_and_backward` must be deterministic, return the scalar loss, and
/// accumulate the analytic gradient into the model's parameters.
pub fn grad_check<M, F>(model: &mut M, mut loss_and_backward: F, h: f64) -> GradCheckReport
where
    M: Parameters<f64> + ?Sized,
    F: FnMut(&mut M) -> f64,
{
    model.zero_grads();
    loss_and_backward(model);
    let analytic: Vec<(String, Vec<f64>)> = model
        .params_mut()
        .iter()
        .map(|p| {
            let n = match p {
                ParamMut::Dense(d) => d.value.as_slice().len(),
                ParamMut::Rows(r) => r.value.as_slice().len(),
            };
            (p.name().to_string(), (0..n).map(|k| p.grad_at(k)).collect())
        })
        .collect();
    model.zero_grads();

    let mut report = GradCheckReport { max_rel_error: 0.0, worst: String::new(), checked: 0 };
    for (pi, (name, grads)) in analytic.iter().enumerate() {
        for (k, &a) in grads.iter().enumerate() {
            let original = nudge(model, pi, k, None);
            nudge(model, pi, k, Some(original + h));
            let up = loss_and_backward(model);
            nudge(model, pi, k, Some(original - h));
            let down = loss_and_backward(model);
            nudge(model, pi, k, Some(original));
            model.zero_grads();
            let numeric = (up - down) / (2.0 * h);
            let err = relative_error(a, numeric);
            report.checked += 1;
            if err > report.max_rel_error || report.worst.is_empty() {
                report.max_rel_error = err;
                report.worst = format!("{name}[{k}]");
            }
        }
    }
    report
}

/// Read element `k` of parameter `pi`, optionally overwriting it. Returns the old value.
fn nudge<M: Parameters<f64> + ?Sized>(model: &mut M, pi: usize, k: usize, set: Option<f64>) -> f64 {
    let mut params = model.params_mut();
    let slot = &mut params[pi].value_mut().as_mut_slice()[k];
    let old = *slot;
    if let Some(v) = set {
        *slot = v;
    }
    old
}

/// Finite-difference gradient of a plain function of a vector.
pub fn numeric_gradient(x: &[f64], h: f64, mut f: impl FnMut(&[f64]) -> f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|k| {
            probe[k] = x[k] + h;
            let up = f(&probe);
            probe[k] = x[k] - h;
            let down = f(&probe);
            probe[k] = x[k];
            (up - down) / (2.0 * h)
        })
        .collect()
}
