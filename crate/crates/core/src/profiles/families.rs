use super::{Jet, Radial};
use crate::error::{Error, Result};

/// Polynomial smoothstep of order `m` and its first two derivatives.
///
/// `S(0) = 0`, `S(1) = 1`, and derivatives of orders `1..m` vanish at both
/// ends, so gluing with constants is `C^{m-1}`.
pub fn smoothstep(m: u32, x: f64) -> Jet {
    if x <= 0.0 {
        return Jet::ZERO;
    }
    if x >= 1.0 {
        return Jet::new(1.0, 0.0, 0.0);
    }
    let m_i = m as i32;
    // (2m-1)! / ((m-1)!)^2
    let mut c = 1.0;
    for j in 0..m {
        c *= (m + j) as f64 / (j + 1) as f64;
    }
    c *= m as f64;
    let (y, z) = (x, 1.0 - x);
    let d1 = c * (y * z).powi(m_i - 1);
    let d2 = c * (m - 1) as f64 * (y * z).powi(m_i - 2) * (z - y);
    // S(x) = x^m sum_{k<m} C(m-1+k, k) (1-x)^k, mirrored for accuracy
    let half = |y: f64, z: f64| {
        let mut sum = 0.0;
        let mut binom = 1.0;
        let mut zk = 1.0;
        for k in 0..m {
            if k > 0 {
                binom *= (m - 1 + k) as f64 / k as f64;
                zk *= z;
            }
            sum += binom * zk;
        }
        y.powi(m_i) * sum
    };
    let value = if x <= 0.5 { half(y, z) } else { 1.0 - half(z, y) };
    Jet::new(value, d1, d2)
}

/// `x^gamma` on `[eps, big]` with smoothstep ramps on `[eps, 2 eps]` and
/// `[big/2, big]`, as a function of a generic variable `x`.
#[derive(Debug, Clone, Copy)]
struct TaperedPower {
    gamma: f64,
    eps: f64,
    big: f64,
    m: u32,
}

impl TaperedPower {
    fn new(gamma: f64, eps: f64, big: f64, m: u32, inner: &str, outer: &str) -> Result<Self> {
        if !gamma.is_finite() {
            return Err(Error::param("gamma", "must be finite"));
        }
        if !(eps > 0.0) || !eps.is_finite() {
            return Err(Error::param(inner, format!("must be positive, got {eps}")));
        }
        if !(big >= 4.0 * eps) || !big.is_finite() {
            return Err(Error::param(
                outer,
                format!("must be finite and at least 4 {inner} (got {big}, {inner} = {eps})"),
            ));
        }
        check_order(m)?;
        Ok(TaperedPower { gamma, eps, big, m })
    }

    fn jet(&self, x: f64) -> Jet {
        if x <= self.eps || x >= self.big {
            return Jet::ZERO;
        }
        let g = self.gamma;
        let p = x.powf(g);
        let (p1, p2) = (g * p / x, g * (g - 1.0) * p / (x * x));
        let lo = if x < 2.0 * self.eps {
            smoothstep(self.m, (x - self.eps) / self.eps)
        } else {
            Jet::new(1.0, 0.0, 0.0)
        };
        let lo = Jet::new(lo.value, lo.d1 / self.eps, lo.d2 / (self.eps * self.eps));
        let half = 0.5 * self.big;
        let hi = if x > half {
            let s = smoothstep(self.m, (self.big - x) / half);
            Jet::new(s.value, -s.d1 / half, s.d2 / (half * half))
        } else {
            Jet::new(1.0, 0.0, 0.0)
        };
        let t = Jet::new(
            lo.value * hi.value,
            lo.d1 * hi.value + lo.value * hi.d1,
            lo.d2 * hi.value + 2.0 * lo.d1 * hi.d1 + lo.value * hi.d2,
        );
        Jet::new(
            p * t.value,
            p1 * t.value + p * t.d1,
            p2 * t.value + 2.0 * p1 * t.d1 + p * t.d2,
        )
    }

    fn interior_breaks(&self) -> [f64; 2] {
        [2.0 * self.eps, 0.5 * self.big]
    }
}

fn check_order(m: u32) -> Result<()> {
    if !(2..=16).contains(&m) {
        return Err(Error::param("m", format!("smoothing order must be in 2..=16, got {m}")));
    }
    Ok(())
}

fn check_radius(name: &str, r: f64) -> Result<()> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::param(name, format!("must be positive and finite, got {r}")));
    }
    Ok(())
}

/// `(1 - (r/R)^2)^m` on `[0, R]`, zero beyond.
#[derive(Debug, Clone, Copy)]
pub struct Bump {
    m: u32,
    radius: f64,
}

impl Bump {
    pub fn new(m: u32, radius: f64) -> Result<Self> {
        if m < 2 {
            return Err(Error::param("m", format!("bump order must be at least 2, got {m}")));
        }
        check_radius("R", radius)?;
        Ok(Bump { m, radius })
    }
}

impl Radial for Bump {
    fn jet(&self, r: f64) -> Jet {
        if r >= self.radius || r < 0.0 {
            return Jet::ZERO;
        }
        let m = self.m as i32;
        let mf = self.m as f64;
        let x = r / self.radius;
        let y = (1.0 - x) * (1.0 + x);
        let r2 = self.radius * self.radius;
        Jet::new(
            y.powi(m),
            -2.0 * mf * r / r2 * y.powi(m - 1),
            -2.0 * mf / r2 * y.powi(m - 1) + 4.0 * mf * (mf - 1.0) * r * r / (r2 * r2) * y.powi(m - 2),
        )
    }

    fn log_jet(&self, anchor: f64, tau: f64) -> Jet {
        let l = (anchor / self.radius).ln() - tau;
        if l >= 0.0 {
            return Jet::ZERO;
        }
        let x2 = (2.0 * l).exp();
        let y = -(2.0 * l).exp_m1();
        let m = self.m as i32;
        let mf = self.m as f64;
        Jet::new(
            y.powi(m),
            2.0 * mf * x2 * y.powi(m - 1),
            -4.0 * mf * x2 * y.powi(m - 1) + 4.0 * mf * (mf - 1.0) * x2 * x2 * y.powi(m - 2),
        )
    }

    fn support(&self) -> (f64, f64) {
        (0.0, self.radius)
    }

    fn scale(&self) -> f64 {
        self.radius
    }

    fn describe(&self) -> String {
        format!("bump(m={}, R={})", self.m, self.radius)
    }
}

/// `exp(-r^2 / (2 sigma^2))`.
#[derive(Debug, Clone, Copy)]
pub struct Gaussian {
    sigma: f64,
}

impl Gaussian {
    pub fn new(sigma: f64) -> Result<Self> {
        check_radius("sigma", sigma)?;
        Ok(Gaussian { sigma })
    }
}

impl Radial for Gaussian {
    fn jet(&self, r: f64) -> Jet {
        let s2 = self.sigma * self.sigma;
        let v = (-r * r / (2.0 * s2)).exp();
        if v == 0.0 {
            return Jet::ZERO;
        }
        Jet::new(v, -r / s2 * v, (r * r / s2 - 1.0) / s2 * v)
    }

    fn log_jet(&self, anchor: f64, tau: f64) -> Jet {
        // a = r^2 / sigma^2; psi = exp(-a/2), da/dtau = -2a
        let a = (2.0 * ((anchor / self.sigma).ln() - tau)).exp();
        let v = (-0.5 * a).exp();
        if v == 0.0 {
            return Jet::ZERO;
        }
        Jet::new(v, a * v, (a * a - 2.0 * a) * v)
    }

    fn support(&self) -> (f64, f64) {
        (0.0, f64::INFINITY)
    }

    fn scale(&self) -> f64 {
        self.sigma
    }

    fn describe(&self) -> String {
        format!("gaussian(sigma={})", self.sigma)
    }
}

/// `r^gamma` between smooth cut-offs on `[eps, 2 eps]` and `[M/2, M]`.
#[derive(Debug, Clone, Copy)]
pub struct MollifiedPower {
    taper: TaperedPower,
}

impl MollifiedPower {
    pub fn new(gamma: f64, eps: f64, outer: f64, m: u32) -> Result<Self> {
        Ok(MollifiedPower {
            taper: TaperedPower::new(gamma, eps, outer, m, "eps", "M")?,
        })
    }
}

impl Radial for MollifiedPower {
    fn jet(&self, r: f64) -> Jet {
        self.taper.jet(r)
    }

    fn support(&self) -> (f64, f64) {
        (self.taper.eps, self.taper.big)
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.taper.interior_breaks().to_vec()
    }

    fn scale(&self) -> f64 {
        (self.taper.eps.sqrt() * self.taper.big.sqrt()).max(f64::MIN_POSITIVE)
    }

    fn describe(&self) -> String {
        let t = &self.taper;
        format!(
            "mollified_power(gamma={}, eps={}, M={}, m={})",
            t.gamma, t.eps, t.big, t.m
        )
    }
}

/// `t^beta` in `t = log(R/r)` between smooth cut-offs on
/// `[t_inner, 2 t_inner]` and `[t_outer/2, t_outer]`.
///
/// Defined natively in `t`, so cut-offs far beyond the range of `r` in
/// floating point are still exact in logarithmic coordinates.
#[derive(Debug, Clone, Copy)]
pub struct LogPower {
    taper: TaperedPower,
    radius: f64,
}

impl LogPower {
    pub fn new(beta: f64, radius: f64, t_inner: f64, t_outer: f64, m: u32) -> Result<Self> {
        check_radius("R", radius)?;
        Ok(LogPower {
            taper: TaperedPower::new(beta, t_inner, t_outer, m, "t_inner", "t_outer")?,
            radius,
        })
    }
}

impl Radial for LogPower {
    fn jet(&self, r: f64) -> Jet {
        if !(r > 0.0) {
            return Jet::ZERO;
        }
        self.taper.jet((self.radius / r).ln()).from_log(r)
    }

    fn log_jet(&self, anchor: f64, tau: f64) -> Jet {
        self.taper.jet(tau - (anchor / self.radius).ln())
    }

    fn support(&self) -> (f64, f64) {
        (
            self.radius * (-self.taper.big).exp(),
            self.radius * (-self.taper.eps).exp(),
        )
    }

    fn log_support(&self, anchor: f64) -> (f64, f64) {
        let d = (anchor / self.radius).ln();
        (self.taper.eps + d, self.taper.big + d)
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.taper
            .interior_breaks()
            .iter()
            .map(|t| self.radius * (-t).exp())
            .collect()
    }

    fn log_breakpoints(&self, anchor: f64) -> Vec<f64> {
        let d = (anchor / self.radius).ln();
        self.taper.interior_breaks().iter().map(|t| t + d).collect()
    }

    fn scale(&self) -> f64 {
        self.radius
    }

    fn describe(&self) -> String {
        let t = &self.taper;
        format!(
            "log_power(beta={}, R={}, t_inner={}, t_outer={}, m={})",
            t.gamma, self.radius, t.eps, t.big, t.m
        )
    }
}
