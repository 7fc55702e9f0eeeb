//! Worst-case quantities for the sub-sampled trust-region methods, evaluated
//! from problem constants: inner-loop lengths, radius floors and hitting-index
//! bounds. Used to check runs on problems whose constants are known.

/// Constants and parameters entering the bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundInputs {
    pub lipschitz_gradient: f64,
    pub lipschitz_hessian: f64,
    pub d0: f64,
    /// `f(x0) − f_low`.
    pub initial_gap: f64,
    pub delta0: f64,
    pub delta_max: f64,
    pub gamma: f64,
    pub alpha: f64,
    pub eps_g: f64,
    pub eps_h: f64,
    /// Coefficient of the curvature term in the second-order decrease test.
    pub kappa: f64,
}

impl BoundInputs {
    fn spread_factor(&self) -> f64 {
        1.0 + 2.0 * self.d0 / self.delta_max
    }

    fn log_gamma(&self, z: f64) -> f64 {
        z.ln() / self.gamma.ln()
    }

    /// Largest inner-loop index a first-order iteration can need:
    /// `1 + max{log_γ(10 L_g D0/ε_g), 0}`.
    pub fn inner_loop_first_order(&self) -> f64 {
        let l = self.lipschitz_gradient;
        1.0 + self.log_gamma(10.0 * l * self.d0 / self.eps_g).max(0.0)
    }

    /// `1 + max{log_γ(10 L_g D0/ε_g), log_γ(10 L_g/ε_H), 0}`.
    pub fn inner_loop_second_order(&self) -> f64 {
        let l = self.lipschitz_gradient;
        let g = self.log_gamma(10.0 * l * self.d0 / self.eps_g);
        let h = self.log_gamma(10.0 * l / self.eps_h);
        1.0 + g.max(h).max(0.0)
    }

    /// Radius floor of the first-order method:
    /// `min{Δ0, (1−α)ε_g/(5[1 + 2D0/Δmax]L_g)}`.
    pub fn radius_floor_first_order(&self) -> f64 {
        let floor = (1.0 - self.alpha) * self.eps_g
            / (5.0 * self.spread_factor() * self.lipschitz_gradient);
        self.delta0.min(floor)
    }

    /// Bound on the first-order hitting index:
    /// `25[1+2D0/Δmax]L_g(f0−f_low)/(α(1−α)) ε_g⁻² + log₂(5[1+2D0/Δmax]L_gΔ0/((1−α)ε_g)) + 1`.
    pub fn iterations_first_order(&self) -> f64 {
        let c = self.spread_factor() * self.lipschitz_gradient;
        let successful = 25.0 * c * self.initial_gap
            / (self.alpha * (1.0 - self.alpha) * self.eps_g * self.eps_g);
        let shrink = (5.0 * c * self.delta0 / ((1.0 - self.alpha) * self.eps_g)).log2();
        successful + shrink + 1.0
    }

    /// Largest radius at which a second-order iteration is guaranteed to
    /// succeed, with the curvature coefficient `κ` carried through.
    pub fn radius_threshold_second_order(&self) -> f64 {
        let l = self.lipschitz_gradient;
        let gradient_part =
            2.0 * (1.0 - self.alpha) * self.eps_g / (5.0 * self.spread_factor() * l);
        let curvature_scale = self.lipschitz_hessian / 6.0
            + 2.0 * (self.d0 / self.delta_max + 1.0) * (l / self.delta_max);
        let curvature_part =
            4.0 * self.kappa * (1.0 - self.alpha) * self.eps_h / (5.0 * curvature_scale);
        gradient_part.min(curvature_part)
    }

    /// Radius floor of the second-order method: `min{Δ0, Δ̄/2}`.
    pub fn radius_floor_second_order(&self) -> f64 {
        self.delta0.min(0.5 * self.radius_threshold_second_order())
    }

    /// Bound on the second-order hitting index:
    /// `(5/α)(f0−f_low) max{ε_g⁻¹Δmin⁻¹, ε_H⁻¹Δmin⁻²} + log₂(Δmax/Δmin) + 1`.
    pub fn iterations_second_order(&self) -> f64 {
        let dmin = self.radius_floor_second_order();
        let per_success = (1.0 / (self.eps_g * dmin)).max(1.0 / (self.eps_h * dmin * dmin));
        5.0 / self.alpha * self.initial_gap * per_success + (self.delta_max / dmin).log2() + 1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inputs() -> BoundInputs {
        BoundInputs {
            lipschitz_gradient: 1.0,
            lipschitz_hessian: 0.0,
            d0: 25.0,
            initial_gap: 2.0,
            delta0: 1.0,
            delta_max: 50.0,
            gamma: 2.0,
            alpha: 0.5,
            eps_g: 1e-2,
            eps_h: 1e-2,
            kappa: 0.5,
        }
    }

    #[test]
    fn first_order_values() {
        let b = inputs();
        // 10·25/0.01 = 25000
        assert!((b.inner_loop_first_order() - (1.0 + 25000f64.log2())).abs() < 1e-12);
        // 0.5·0.01/(5·2) = 5e-4
        assert!((b.radius_floor_first_order() - 5e-4).abs() < 1e-18);
        let expected = 25.0 * 2.0 * 2.0 / (0.25 * 1e-4) + (10.0f64 / 0.005).log2() + 1.0;
        assert!((b.iterations_first_order() - expected).abs() < 1e-6);
    }

    #[test]
    fn inner_bound_never_below_one() {
        let b = BoundInputs {
            d0: 1e-9,
            ..inputs()
        };
        assert_eq!(b.inner_loop_first_order(), 1.0);
    }

    #[test]
    fn second_order_floor_tracks_kappa() {
        let b = inputs();
        let half = b.radius_threshold_second_order();
        let full = BoundInputs { kappa: 1.0, ..b }.radius_threshold_second_order();
        assert!(full >= half);
        assert!(b.radius_floor_second_order() <= b.delta0);
        assert!(b.iterations_second_order() > 0.0);
    }
}
