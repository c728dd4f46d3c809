//! Finite-difference gradient verification.

use super::tape::{Tape, Var};

/// Max relative error between analytic gradients and central differences for
/// a scalar-valued graph builder over a single input tensor.
pub fn gradient_check<F>(f: F, rows: usize, cols: usize, x: &[f64], h: f64) -> f64
where
    F: for<'a> Fn(&'a Tape, Var<'a>) -> Var<'a> + Copy,
{
    gradient_check_multi(
        |tape, vars| f(tape, vars[0]),
        &[(rows, cols, x.to_vec())],
        h,
    )
}

/// Multi-input variant: `f` receives one `Var` per `(rows, cols, data)`
/// input, in order, and must return a scalar loss.
pub fn gradient_check_multi<F>(f: F, inputs: &[(usize, usize, Vec<f64>)], h: f64) -> f64
where
    F: for<'a> Fn(&'a Tape, &[Var<'a>]) -> Var<'a>,
{
    assert!(h > 0.0);
    let eval = |datas: &[Vec<f64>]| -> f64 {
        let tape = Tape::new();
        let vars: Vec<Var<'_>> = inputs
            .iter()
            .zip(datas)
            .map(|((r, c, _), d)| tape.leaf(*r, *c, d, false))
            .collect();
        f(&tape, &vars).item()
    };

    // analytic gradients
    let tape = Tape::new();
    let vars: Vec<Var<'_>> = inputs
        .iter()
        .map(|(r, c, d)| tape.leaf(*r, *c, d, true))
        .collect();
    let loss = f(&tape, &vars);
    let grads = tape.backward(loss);
    let analytic: Vec<Vec<f64>> = vars.iter().map(|v| grads.wrt(*v)).collect();

    let base: Vec<Vec<f64>> = inputs.iter().map(|(_, _, d)| d.clone()).collect();
    let mut max_err = 0.0f64;
    for (vi, (_, _, data)) in inputs.iter().enumerate() {
        for ci in 0..data.len() {
            let mut plus = base.clone();
            plus[vi][ci] += h;
            let mut minus = base.clone();
            minus[vi][ci] -= h;
            let fd = (eval(&plus) - eval(&minus)) / (2.0 * h);
            let a = analytic[vi][ci];
            let err = (a - fd).abs() / f64::max(1.0, a.abs());
            max_err = max_err.max(err);
        }
    }
    max_err
}
