use super::{NumericsError, Tape, Tensor, Var};

pub const DEFAULT_STEP: f64 = 1e-5;

#[derive(Clone, Debug, Default)]
pub struct GradCheckReport {
    /// Max over checked coordinates of `|analytic - numeric| / max(1, |analytic|)`.
    pub max_rel_error: f64,
    pub checked: usize,
    /// `(input, flat index)` of coordinates whose `±h` probes straddle a relu kink.
    pub skipped: Vec<(usize, usize)>,
}

/// Central-difference check of a scalar function of one tensor.
pub fn grad_check<F>(f: F, x: &Tensor, h: f64) -> Result<GradCheckReport, NumericsError>
where
    F: Fn(&mut Tape, Var) -> Result<Var, NumericsError>,
{
    grad_check_many(|tape, vars| f(tape, vars[0]), std::slice::from_ref(x), h)
}

/// Central-difference check over every coordinate of every input.
///
/// Coordinates where the relu sign pattern differs between the `+h` and `-h`
/// evaluations are skipped: the function is not differentiable in between.
pub fn grad_check_many<F>(
    f: F,
    inputs: &[Tensor],
    h: f64,
) -> Result<GradCheckReport, NumericsError>
where
    F: Fn(&mut Tape, &[Var]) -> Result<Var, NumericsError>,
{
    let eval = |values: &[Tensor]| -> Result<(f64, Vec<bool>), NumericsError> {
        let mut tape = Tape::new();
        let vars: Vec<Var> = values.iter().map(|t| tape.param(t.clone())).collect();
        let out = f(&mut tape, &vars)?;
        Ok((tape.value(out).item()?, tape.relu_pattern()))
    };

    let mut tape = Tape::new();
    let vars: Vec<Var> = inputs.iter().map(|t| tape.param(t.clone())).collect();
    let out = f(&mut tape, &vars)?;
    tape.value(out).item()?;
    let grads = tape.backward(out)?;
    let analytic: Vec<Tensor> = vars.iter().map(|&v| grads.get(v)).collect();

    let mut report = GradCheckReport::default();
    let mut probe: Vec<Tensor> = inputs.to_vec();
    for (which, input) in inputs.iter().enumerate() {
        for idx in 0..input.len() {
            let orig = input.data()[idx];
            probe[which].data_mut()[idx] = orig + h;
            let (plus, pat_plus) = eval(&probe)?;
            probe[which].data_mut()[idx] = orig - h;
            let (minus, pat_minus) = eval(&probe)?;
            probe[which].data_mut()[idx] = orig;
            if pat_plus != pat_minus {
                report.skipped.push((which, idx));
                continue;
            }
            let numeric = (plus - minus) / (2.0 * h);
            let a = analytic[which].data()[idx];
            let rel = (a - numeric).abs() / a.abs().max(1.0);
            report.max_rel_error = report.max_rel_error.max(rel);
            report.checked += 1;
        }
    }
    Ok(report)
}
