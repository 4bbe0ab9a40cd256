//! Harmonic and caloric extensions over a time grid, and the maximal operators built on them.

mod balls;
mod maximal;

pub use balls::{ball_max, ball_sum, Ball};
pub use maximal::{
    area_integral, hl_maximal, nontangential_max, radial_maximal, Mollifier, SpectralWindow,
};

use crate::error::{param, Error, Result};
use crate::grid::{io, map_spectrum_many, GridFunction, GridSpec};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Smallest admissible time; below it the heat scale `sqrt(t)` falls under any practical `h`.
pub const MIN_TIME: f64 = 1e-4;

/// Strictly increasing positive times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    values: Vec<f64>,
}

impl TimeGrid {
    /// `count` log-spaced values from `t_min` to `t_max` inclusive.
    pub fn log_spaced(t_min: f64, t_max: f64, count: usize) -> Result<Self> {
        if !(t_min >= MIN_TIME && t_min.is_finite()) {
            return param("t_min", format!("must be >= {MIN_TIME}, got {t_min}"));
        }
        if count == 0 {
            return param("count", "must be positive");
        }
        if count == 1 {
            return Self::from_values(vec![t_min]);
        }
        if !(t_max > t_min && t_max.is_finite()) {
            return param("t_max", format!("must exceed t_min = {t_min}, got {t_max}"));
        }
        let (a, b) = (t_min.ln(), t_max.ln());
        let mut values: Vec<f64> = (0..count)
            .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
            .collect();
        values[0] = t_min;
        values[count - 1] = t_max;
        Self::from_values(values)
    }

    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return param("times", "empty time grid");
        }
        if values[0] < MIN_TIME || values.iter().any(|t| !t.is_finite()) {
            return param("times", format!("times must be finite and >= {MIN_TIME}"));
        }
        if values.windows(2).any(|w| w[1] <= w[0]) {
            return param("times", "times must be strictly increasing");
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn t_min(&self) -> f64 {
        self.values[0]
    }

    pub fn t_max(&self) -> f64 {
        *self.values.last().unwrap()
    }

    /// Trapezoid weights in `t` for the (nonuniform) grid.
    pub fn trapezoid_weights(&self) -> Vec<f64> {
        let v = &self.values;
        let m = v.len();
        if m == 1 {
            return vec![0.0];
        }
        (0..m)
            .map(|i| {
                let left = if i > 0 { v[i] - v[i - 1] } else { 0.0 };
                let right = if i + 1 < m { v[i + 1] - v[i] } else { 0.0 };
                0.5 * (left + right)
            })
            .collect()
    }

    /// Same grid shifted by `a`.
    pub fn shifted(&self, a: f64) -> Result<Self> {
        Self::from_values(self.values.iter().map(|t| t + a).collect())
    }

    /// Identifier used in grid ids, e.g. `t48-0.001-64`.
    pub fn id(&self) -> String {
        format!("t{}-{}-{}", self.len(), self.t_min(), self.t_max())
    }
}

/// Which kernel produced a stack.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelTag {
    Poisson,
    Heat,
    Custom,
}

impl KernelTag {
    pub fn name(&self) -> &'static str {
        match self {
            KernelTag::Poisson => "poisson",
            KernelTag::Heat => "heat",
            KernelTag::Custom => "custom",
        }
    }

    /// Transform of the kernel at time `t`.
    pub fn symbol(&self, xi: [f64; 2], t: f64) -> Result<f64> {
        let r2 = xi[0] * xi[0] + xi[1] * xi[1];
        match self {
            KernelTag::Poisson => Ok((-2.0 * PI * t * r2.sqrt()).exp()),
            KernelTag::Heat => Ok((-4.0 * PI * PI * t * r2).exp()),
            KernelTag::Custom => Err(Error::Unsupported("custom stacks carry no symbol".into())),
        }
    }
}

/// One grid function per time, all on the same spec.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtensionStack {
    spec: GridSpec,
    times: TimeGrid,
    slices: Vec<GridFunction>,
    kernel: KernelTag,
}

impl ExtensionStack {
    pub fn new(times: TimeGrid, slices: Vec<GridFunction>, kernel: KernelTag) -> Result<Self> {
        let Some(first) = slices.first() else {
            return param("slices", "empty stack");
        };
        let spec = *first.spec();
        if slices.len() != times.len() {
            return Err(Error::Mismatch(format!(
                "{} slices for {} times",
                slices.len(),
                times.len()
            )));
        }
        for s in &slices {
            spec.ensure_same(s.spec())?;
        }
        Ok(Self {
            spec,
            times,
            slices,
            kernel,
        })
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn times(&self) -> &TimeGrid {
        &self.times
    }

    pub fn slices(&self) -> &[GridFunction] {
        &self.slices
    }

    pub fn slice(&self, i: usize) -> &GridFunction {
        &self.slices[i]
    }

    pub fn kernel(&self) -> KernelTag {
        self.kernel
    }

    pub fn len(&self) -> usize {
        self.slices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slices.is_empty()
    }

    /// Applies `f` slice by slice (in parallel), keeping times and kernel tag.
    pub fn map_slices(
        &self,
        f: impl Fn(&GridFunction, f64) -> Result<GridFunction> + Sync,
    ) -> Result<Self> {
        use rayon::prelude::*;
        let slices = self
            .slices
            .par_iter()
            .zip(self.times.values().par_iter())
            .map(|(s, &t)| f(s, t))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            spec: self.spec,
            times: self.times.clone(),
            slices,
            kernel: self.kernel,
        })
    }

    /// Same data tagged as `custom`.
    pub fn into_custom(mut self) -> Self {
        self.kernel = KernelTag::Custom;
        self
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            spec: self.spec,
            times: self.times.clone(),
            slices: self.slices.iter().map(|s| s.scale(c)).collect(),
            kernel: self.kernel,
        }
    }

    /// Values `t -> u(x_idx, t)` at one node.
    pub fn profile_at(&self, idx: usize) -> Vec<Complex64> {
        self.slices.iter().map(|s| s.get(idx)).collect()
    }

    /// `max_t amalgam_norm(slice)`.
    pub fn tent_norm(&self, e: crate::amalgam::Exponents) -> f64 {
        self.slices
            .iter()
            .map(|s| crate::amalgam::discrete_norm(&self.spec, &s.abs(), e))
            .fold(0.0, f64::max)
    }

    /// Binary dump: grid header plus `slices`, `times`, `kernel`, then slices in ascending `t`.
    pub fn encode(&self) -> Vec<u8> {
        let times = self
            .times
            .values()
            .iter()
            .map(|t| format!("{t:e}"))
            .collect::<Vec<_>>()
            .join(",");
        let refs: Vec<&[Complex64]> = self.slices.iter().map(|s| s.values()).collect();
        io::encode_many(
            &self.spec,
            &[
                ("slices", self.len().to_string()),
                ("times", times),
                ("kernel", self.kernel.name().to_string()),
            ],
            &refs,
        )
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        let (header, payload) = io::split_header(bytes)?;
        let spec = header.spec()?;
        let count: usize = header
            .get("slices")?
            .parse()
            .map_err(|e| Error::Format(format!("slices: {e}")))?;
        let times = header
            .get("times")?
            .split(',')
            .map(|s| s.parse::<f64>().map_err(|e| Error::Format(format!("times: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        let kernel = match header.get("kernel")? {
            "poisson" => KernelTag::Poisson,
            "heat" => KernelTag::Heat,
            "custom" => KernelTag::Custom,
            other => return Err(Error::Format(format!("unknown kernel `{other}`"))),
        };
        let values = io::read_samples(payload, spec.len() * count)?;
        let slices = values
            .chunks_exact(spec.len())
            .map(|c| GridFunction::new(spec, c.to_vec()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(TimeGrid::from_values(times)?, slices, kernel)
    }
}

/// `u(., t) = f * P_t` or `f * W_t`, one spectral pass per time.
pub fn extend(f: &GridFunction, kernel: KernelTag, tg: &TimeGrid) -> Result<ExtensionStack> {
    if kernel == KernelTag::Custom {
        return Err(Error::Unsupported("extend needs the poisson or heat kernel".into()));
    }
    let slices = map_spectrum_many(f, tg.values(), |&t, xi| {
        Complex64::new(kernel.symbol(xi, t).unwrap_or(0.0), 0.0)
    });
    ExtensionStack::new(tg.clone(), slices, kernel)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_grid, sample, FunctionSpec};
    use crate::kernels::{make_kernel, KernelKind};

    #[test]
    fn log_grid_endpoints_and_validation() {
        let tg = TimeGrid::log_spaced(1e-3, 64.0, 48).unwrap();
        assert_eq!(tg.len(), 48);
        assert_eq!(tg.t_min(), 1e-3);
        assert_eq!(tg.t_max(), 64.0);
        assert!(TimeGrid::log_spaced(1e-5, 1.0, 4).is_err());
        assert!(TimeGrid::log_spaced(1.0, 0.5, 4).is_err());
        assert!(TimeGrid::from_values(vec![1.0, 1.0]).is_err());
        let w = TimeGrid::from_values(vec![1.0, 2.0, 4.0]).unwrap().trapezoid_weights();
        assert_eq!(w, vec![0.5, 1.5, 1.0]);
    }

    #[test]
    fn heat_extension_of_heat_kernel_is_semigroup() {
        let spec = make_grid(1, 32.0, 1024).unwrap();
        let w0 = make_kernel(KernelKind::Heat, Some(0.1), spec).unwrap();
        let tg = TimeGrid::log_spaced(0.01, 4.0, 6).unwrap();
        let stack = extend(&w0, KernelTag::Heat, &tg).unwrap();
        for (s, &t) in stack.slices().iter().zip(tg.values()) {
            let expect = make_kernel(KernelKind::Heat, Some(0.1 + t), spec).unwrap();
            assert!(s.relative_l2(&expect).unwrap() < 1e-8);
        }
    }

    #[test]
    fn stack_dump_round_trip() {
        let spec = make_grid(1, 4.0, 32).unwrap();
        let f = sample(&FunctionSpec::Gaussian { center: vec![], width: 1.0 }, spec).unwrap();
        let tg = TimeGrid::log_spaced(0.01, 1.0, 3).unwrap();
        let stack = extend(&f, KernelTag::Poisson, &tg).unwrap();
        let back = ExtensionStack::decode(&stack.encode()).unwrap();
        assert_eq!(back, stack);
    }

    #[test]
    fn custom_extension_rejected() {
        let spec = make_grid(1, 4.0, 32).unwrap();
        let tg = TimeGrid::log_spaced(0.01, 1.0, 3).unwrap();
        assert!(extend(&GridFunction::zeros(spec), KernelTag::Custom, &tg).is_err());
    }
}
