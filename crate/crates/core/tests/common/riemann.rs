//! Exact solution of the 1D Riemann problem for an ideal gas, written
//! from the textbook pressure-function construction. Used only as a test
//! oracle, independent of the solver's flux code.

#[derive(Debug, Clone, Copy)]
pub struct Side {
    pub rho: f64,
    pub u: f64,
    pub p: f64,
}

impl Side {
    fn c(&self, g: f64) -> f64 {
        (g * self.p / self.rho).sqrt()
    }
}

/// Pressure function of one side and its derivative in `p`.
fn branch(p: f64, s: &Side, g: f64) -> (f64, f64) {
    let c = s.c(g);
    if p > s.p {
        let a = 2.0 / ((g + 1.0) * s.rho);
        let b = (g - 1.0) / (g + 1.0) * s.p;
        let q = (a / (p + b)).sqrt();
        ((p - s.p) * q, q * (1.0 - 0.5 * (p - s.p) / (p + b)))
    } else {
        let e = (g - 1.0) / (2.0 * g);
        let r = (p / s.p).powf(e);
        (2.0 * c / (g - 1.0) * (r - 1.0), r / (s.rho * c) * (s.p / p))
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Star {
    pub p: f64,
    pub u: f64,
}

pub fn star_state(l: &Side, r: &Side, g: f64) -> Star {
    let du = r.u - l.u;
    // two-rarefaction guess
    let e = (g - 1.0) / (2.0 * g);
    let (cl, cr) = (l.c(g), r.c(g));
    let num = cl + cr - 0.5 * (g - 1.0) * du;
    let den = cl / l.p.powf(e) + cr / r.p.powf(e);
    let mut p = (num / den).powf(1.0 / e).max(1e-12);
    for _ in 0..100 {
        let (fl, dl) = branch(p, l, g);
        let (fr, dr) = branch(p, r, g);
        let next = (p - (fl + fr + du) / (dl + dr)).max(1e-14);
        let done = (next - p).abs() <= 1e-15 * (next + p);
        p = next;
        if done {
            break;
        }
    }
    let (fl, _) = branch(p, l, g);
    let (fr, _) = branch(p, r, g);
    Star { p, u: 0.5 * (l.u + r.u) + 0.5 * (fr - fl) }
}

/// State at similarity coordinate `xi = x/t`.
pub fn sample(l: &Side, r: &Side, g: f64, xi: f64) -> Side {
    let st = star_state(l, r, g);
    let gm = (g - 1.0) / (g + 1.0);
    if xi <= st.u {
        let c = l.c(g);
        if st.p > l.p {
            let sh = l.u - c * ((g + 1.0) / (2.0 * g) * st.p / l.p + (g - 1.0) / (2.0 * g)).sqrt();
            if xi <= sh {
                *l
            } else {
                Side { rho: l.rho * (st.p / l.p + gm) / (gm * st.p / l.p + 1.0), u: st.u, p: st.p }
            }
        } else {
            let c_star = c * (st.p / l.p).powf((g - 1.0) / (2.0 * g));
            let (head, tail) = (l.u - c, st.u - c_star);
            if xi <= head {
                *l
            } else if xi >= tail {
                Side { rho: l.rho * (st.p / l.p).powf(1.0 / g), u: st.u, p: st.p }
            } else {
                let f = 2.0 / (g + 1.0) + gm / c * (l.u - xi);
                Side { rho: l.rho * f.powf(2.0 / (g - 1.0)), u: 2.0 / (g + 1.0) * (c + 0.5 * (g - 1.0) * l.u + xi), p: l.p * f.powf(2.0 * g / (g - 1.0)) }
            }
        }
    } else {
        let c = r.c(g);
        if st.p > r.p {
            let sh = r.u + c * ((g + 1.0) / (2.0 * g) * st.p / r.p + (g - 1.0) / (2.0 * g)).sqrt();
            if xi >= sh {
                *r
            } else {
                Side { rho: r.rho * (st.p / r.p + gm) / (gm * st.p / r.p + 1.0), u: st.u, p: st.p }
            }
        } else {
            let c_star = c * (st.p / r.p).powf((g - 1.0) / (2.0 * g));
            let (head, tail) = (r.u + c, st.u + c_star);
            if xi >= head {
                *r
            } else if xi <= tail {
                Side { rho: r.rho * (st.p / r.p).powf(1.0 / g), u: st.u, p: st.p }
            } else {
                let f = 2.0 / (g + 1.0) - gm / c * (r.u - xi);
                Side { rho: r.rho * f.powf(2.0 / (g - 1.0)), u: 2.0 / (g + 1.0) * (-c + 0.5 * (g - 1.0) * r.u + xi), p: r.p * f.powf(2.0 * g / (g - 1.0)) }
            }
        }
    }
}

/// Head and tail speeds of the left rarefaction, if the left wave is one.
pub fn left_fan(l: &Side, r: &Side, g: f64) -> Option<(f64, f64)> {
    let st = star_state(l, r, g);
    if st.p >= l.p {
        return None;
    }
    let c = l.c(g);
    let c_star = c * (st.p / l.p).powf((g - 1.0) / (2.0 * g));
    Some((l.u - c, st.u - c_star))
}

/// Right shock speed, if the right wave is a shock.
pub fn right_shock(l: &Side, r: &Side, g: f64) -> Option<f64> {
    let st = star_state(l, r, g);
    if st.p <= r.p {
        return None;
    }
    let c = r.c(g);
    Some(r.u + c * ((g + 1.0) / (2.0 * g) * st.p / r.p + (g - 1.0) / (2.0 * g)).sqrt())
}
