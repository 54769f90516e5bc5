use crate::mcmc::{StateSpaceKind, Target};
use crate::{Error, Result};

/// Temperatures `1 = T_1 <= T_2 <= ... <= T_M < inf`.
#[derive(Clone, Debug, PartialEq)]
pub struct TemperatureLadder {
    temperatures: Vec<f64>,
}

impl TemperatureLadder {
    pub fn new(temperatures: Vec<f64>) -> Result<Self> {
        match temperatures.first() {
            None => return Err(Error::InvalidLadder("no temperatures".into())),
            Some(&t) if t != 1.0 => {
                return Err(Error::InvalidLadder(format!("first temperature must be 1, got {t}")))
            }
            _ => {}
        }
        if temperatures.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidLadder("temperatures must be finite".into()));
        }
        if temperatures.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidLadder("temperatures must be non-decreasing".into()));
        }
        Ok(Self { temperatures })
    }

    /// `m` temperatures equally spaced on `[1, t_max]`.
    pub fn equally_spaced(m: usize, t_max: f64) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidLadder("no temperatures".into()));
        }
        if m == 1 {
            return Self::new(vec![1.0]);
        }
        let step = (t_max - 1.0) / (m - 1) as f64;
        let mut temps: Vec<f64> = (0..m).map(|i| 1.0 + step * i as f64).collect();
        temps[m - 1] = t_max;
        Self::new(temps)
    }

    /// All temperatures equal to one.
    pub fn flat(m: usize) -> Result<Self> {
        Self::new(vec![1.0; m])
    }

    pub fn len(&self) -> usize {
        self.temperatures.len()
    }

    pub fn is_empty(&self) -> bool {
        self.temperatures.is_empty()
    }

    pub fn temperatures(&self) -> &[f64] {
        &self.temperatures
    }

    pub fn inverse_temperatures(&self) -> Vec<f64> {
        self.temperatures.iter().map(|t| 1.0 / t).collect()
    }
}

/// How parallel tempering interleaves update and swap steps, or the PHS
/// partner choice.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SwapMode {
    /// Geyer: a swap step follows every update step.
    PtDeterministic,
    /// Liu: each iteration is a swap step with probability `s`.
    PtIndependent(f64),
    /// PHS: partner drawn uniformly from chains `2..=M`, swap always accepted.
    PhsUniform,
}

/// `f(x)^(1/T)`, up to the normalising constant which never enters a ratio.
pub struct HeatedTarget<'a, T> {
    pub base: &'a T,
    pub temperature: f64,
}

impl<'a, T: Target> HeatedTarget<'a, T> {
    pub fn new(base: &'a T, temperature: f64) -> Result<Self> {
        if !(temperature >= 1.0 && temperature.is_finite()) {
            return Err(Error::InvalidLadder(format!("temperature {temperature} must be finite and >= 1")));
        }
        Ok(Self { base, temperature })
    }
}

impl<T: Target> Target for HeatedTarget<'_, T> {
    type State = T::State;

    fn log_density(&self, state: &T::State) -> f64 {
        self.base.log_density(state) / self.temperature
    }

    fn state_space(&self) -> StateSpaceKind {
        self.base.state_space()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ladder_validation() {
        assert!(TemperatureLadder::new(vec![]).is_err());
        assert!(TemperatureLadder::new(vec![2.0, 3.0]).is_err());
        assert!(TemperatureLadder::new(vec![1.0, 3.0, 2.0]).is_err());
        assert!(TemperatureLadder::new(vec![1.0, f64::INFINITY]).is_err());
        assert!(TemperatureLadder::new(vec![1.0, 1.0, 2.5]).is_ok());
    }

    #[test]
    fn nine_equally_spaced_on_one_to_five() {
        let l = TemperatureLadder::equally_spaced(9, 5.0).unwrap();
        assert_eq!(l.len(), 9);
        assert_eq!(l.temperatures()[0], 1.0);
        assert_eq!(l.temperatures()[8], 5.0);
        assert!((l.temperatures()[1] - 1.5).abs() < 1e-15);
    }

    #[test]
    fn heated_density_is_scaled() {
        let t = crate::finite::FiniteTarget::from_weights(&[1.0, 4.0]);
        let h = HeatedTarget::new(&t, 2.0).unwrap();
        assert!((h.log_density(&1) - 2f64.ln()).abs() < 1e-15);
        assert!(HeatedTarget::new(&t, 0.5).is_err());
    }
}
