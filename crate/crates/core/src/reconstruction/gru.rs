//! Gated recurrent unit (Cho et al. 2014 form):
//!
//! ```text
//! z  = σ(W_z x + U_z h + b_z)
//! r  = σ(W_r x + U_r h + b_r)
//! h̃  = tanh(W_h x + U_h (r ⊙ h) + b_h)
//! h' = (1 − z) ⊙ h + z ⊙ h̃
//! ```

use crate::numerics::layers::{sigmoid, sigmoid_grad_from_output, tanh_grad_from_output};
use crate::numerics::param::{Param, ParamMut, Parameters};
use crate::numerics::{Matrix, Real, Rng};

#[derive(Debug, Clone)]
pub struct GruCell<T> {
    pub w_z: Param<T>,
    pub w_r: Param<T>,
    pub w_h: Param<T>,
    pub u_z: Param<T>,
    pub u_r: Param<T>,
    pub u_h: Param<T>,
    pub b_z: Param<T>,
    pub b_r: Param<T>,
    pub b_h: Param<T>,
}

/// Values saved by the forward pass for backpropagation.
#[derive(Debug, Clone)]
pub struct GruStep<T> {
    pub x: Vec<T>,
    pub h_prev: Vec<T>,
    pub z: Vec<T>,
    pub r: Vec<T>,
    pub candidate: Vec<T>,
    pub r_h: Vec<T>,
    pub h: Vec<T>,
}

impl<T: Real> GruCell<T> {
    pub fn new(prefix: &str, input: usize, hidden: usize, rng: &mut Rng) -> Self {
        let w = |gate: &str, rng: &mut Rng| Param::fan_in_uniform(format!("{prefix}.W_{gate}"), hidden, input, rng);
        let u = |gate: &str, rng: &mut Rng| Param::fan_in_uniform(format!("{prefix}.U_{gate}"), hidden, hidden, rng);
        let b = |gate: &str| Param::zeros(format!("{prefix}.b_{gate}"), hidden, 1);
        GruCell {
            w_z: w("z", rng),
            w_r: w("r", rng),
            w_h: w("h", rng),
            u_z: u("z", rng),
            u_r: u("r", rng),
            u_h: u("h", rng),
            b_z: b("z"),
            b_r: b("r"),
            b_h: b("h"),
        }
    }

    pub fn hidden(&self) -> usize {
        self.u_z.value.rows()
    }

    pub fn input_dim(&self) -> usize {
        self.w_z.value.cols()
    }

    fn pre_activation(&self, w: &Param<T>, u: &Param<T>, b: &Param<T>, x: &[T], h: &[T]) -> Vec<T> {
        let mut a = b.value.as_slice().to_vec();
        w.value.matvec_acc(x, &mut a);
        u.value.matvec_acc(h, &mut a);
        a
    }

    pub fn forward(&self, h_prev: &[T], x: &[T]) -> GruStep<T> {
        let z: Vec<T> =
            self.pre_activation(&self.w_z, &self.u_z, &self.b_z, x, h_prev).into_iter().map(sigmoid).collect();
        let r: Vec<T> =
            self.pre_activation(&self.w_r, &self.u_r, &self.b_r, x, h_prev).into_iter().map(sigmoid).collect();
        let r_h: Vec<T> = r.iter().zip(h_prev).map(|(a, b)| *a * *b).collect();
        let candidate: Vec<T> =
            self.pre_activation(&self.w_h, &self.u_h, &self.b_h, x, &r_h).into_iter().map(|v| v.tanh()).collect();
        let h = (0..h_prev.len()).map(|i| (T::one() - z[i]) * h_prev[i] + z[i] * candidate[i]).collect();
        GruStep { x: x.to_vec(), h_prev: h_prev.to_vec(), z, r, candidate, r_h, h }
    }

    /// Accumulate parameter gradients for one step. Returns `(dh_prev, dx)`.
    pub fn backward(&mut self, step: &GruStep<T>, dh: &[T]) -> (Vec<T>, Vec<T>) {
        let n = dh.len();
        let mut dh_prev: Vec<T> = (0..n).map(|i| dh[i] * (T::one() - step.z[i])).collect();
        let mut dx = vec![T::zero(); step.x.len()];

        // Candidate branch.
        let da_h: Vec<T> = (0..n).map(|i| dh[i] * step.z[i] * tanh_grad_from_output(step.candidate[i])).collect();
        self.w_h.grad.outer_acc(&da_h, &step.x);
        self.u_h.grad.outer_acc(&da_h, &step.r_h);
        crate::numerics::tensor::add_assign(self.b_h.grad.as_mut_slice(), &da_h);
        self.w_h.value.matvec_t_acc(&da_h, &mut dx);
        let mut d_rh = vec![T::zero(); n];
        self.u_h.value.matvec_t_acc(&da_h, &mut d_rh);
        for i in 0..n {
            dh_prev[i] = dh_prev[i] + d_rh[i] * step.r[i];
        }

        // Update gate.
        let da_z: Vec<T> = (0..n)
            .map(|i| dh[i] * (step.candidate[i] - step.h_prev[i]) * sigmoid_grad_from_output(step.z[i]))
            .collect();
        // Reset gate.
        let da_r: Vec<T> = (0..n).map(|i| d_rh[i] * step.h_prev[i] * sigmoid_grad_from_output(step.r[i])).collect();

        for (w, u, b, da) in
            [(&mut self.w_z, &mut self.u_z, &mut self.b_z, &da_z), (&mut self.w_r, &mut self.u_r, &mut self.b_r, &da_r)]
        {
            w.grad.outer_acc(da, &step.x);
            u.grad.outer_acc(da, &step.h_prev);
            crate::numerics::tensor::add_assign(b.grad.as_mut_slice(), da);
            w.value.matvec_t_acc(da, &mut dx);
            u.value.matvec_t_acc(da, &mut dh_prev);
        }
        (dh_prev, dx)
    }
}

impl<T: Real> Parameters<T> for GruCell<T> {
    fn collect_params<'a>(&'a mut self, out: &mut Vec<ParamMut<'a, T>>) {
        for p in [
            &mut self.w_z,
            &mut self.w_r,
            &mut self.w_h,
            &mut self.u_z,
            &mut self.u_r,
            &mut self.u_h,
            &mut self.b_z,
            &mut self.b_r,
            &mut self.b_h,
        ] {
            out.push(ParamMut::Dense(p));
        }
    }

    fn collect_values<'a>(&'a self, out: &mut Vec<(&'a str, &'a Matrix<T>)>) {
        for p in [&self.w_z, &self.w_r, &self.w_h, &self.u_z, &self.u_r, &self.u_h, &self.b_z, &self.b_r, &self.b_h] {
            out.push((&p.name, &p.value));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::gradcheck::{grad_check, numeric_gradient, relative_error};
    use crate::numerics::tensor::dot;

    fn random_vec(rng: &mut Rng, n: usize) -> Vec<f64> {
        (0..n).map(|_| rng.uniform(-1.0, 1.0)).collect()
    }

    fn randomized_cell(seed: u64, input: usize, hidden: usize) -> GruCell<f64> {
        let mut rng = Rng::new(seed);
        let mut cell = GruCell::new("gru", input, hidden, &mut rng);
        for b in [&mut cell.b_z, &mut cell.b_r, &mut cell.b_h] {
            for v in b.value.as_mut_slice() {
                *v = rng.uniform(-0.5, 0.5);
            }
        }
        cell
    }

    #[test]
    fn zero_parameters_halve_the_state() {
        let mut cell = GruCell::<f64>::new("gru", 3, 4, &mut Rng::new(0));
        for mut p in cell.params_mut() {
            p.value_mut().fill_zero();
        }
        let h = [1.0, -2.0, 0.5, 4.0];
        let step = cell.forward(&h, &[0.3, 0.1, -0.7]);
        assert!(step.z.iter().chain(&step.r).all(|v| *v == 0.5));
        assert!(step.candidate.iter().all(|v| *v == 0.0));
        assert_eq!(step.h, vec![0.5, -1.0, 0.25, 2.0]);
        assert_eq!(cell.forward(&[0.0; 4], &[1.0, 1.0, 1.0]).h, vec![0.0; 4]);
    }

    #[test]
    fn parameter_gradients_match_finite_differences() {
        for seed in 0..20 {
            let mut rng = Rng::new(1000 + seed);
            let mut cell = randomized_cell(seed, 8, 8);
            let h = random_vec(&mut rng, 8);
            let x = random_vec(&mut rng, 8);
            let c = random_vec(&mut rng, 8);
            let report = grad_check(
                &mut cell,
                |cell| {
                    let step = cell.forward(&h, &x);
                    cell.backward(&step, &c);
                    dot(&c, &step.h)
                },
                1e-5,
            );
            assert!(report.passes(1e-4), "seed {seed}: {report:?}");
        }
    }

    #[test]
    fn state_and_input_gradients_match_finite_differences() {
        for seed in 0..20 {
            let mut rng = Rng::new(2000 + seed);
            let mut cell = randomized_cell(seed, 5, 8);
            let h = random_vec(&mut rng, 8);
            let x = random_vec(&mut rng, 5);
            let c = random_vec(&mut rng, 8);
            let step = cell.forward(&h, &x);
            let (dh, dx) = cell.backward(&step, &c);
            let num_h = numeric_gradient(&h, 1e-5, |h| dot(&c, &cell.forward(h, &x).h));
            let num_x = numeric_gradient(&x, 1e-5, |x| dot(&c, &cell.forward(&h, x).h));
            for (a, n) in dh.iter().zip(&num_h).chain(dx.iter().zip(&num_x)) {
                assert!(relative_error(*a, *n) < 1e-4, "seed {seed}: {a} vs {n}");
            }
        }
    }
}
