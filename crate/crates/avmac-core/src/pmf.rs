use crate::CoreError;

/// Maximum tolerated deviation of a probability vector's sum from 1.
pub const PROB_TOL: f64 = 1e-9;

/// Deviations at or below this are left untouched instead of renormalized,
/// so serializing and re-parsing clean data reproduces it bit for bit.
pub const RENORM_TOL: f64 = 1e-12;

/// Probability mass function on a finite alphabet.
///
/// Entries are finite, nonnegative, and sum to 1 within [`RENORM_TOL`] after
/// construction. Inputs whose sum deviates by more than [`PROB_TOL`] are
/// rejected; deviations in between are scaled out.
#[derive(Debug, Clone, PartialEq)]
pub struct Pmf {
    p: Vec<f64>,
}

impl Pmf {
    pub fn new(p: Vec<f64>) -> Result<Self, CoreError> {
        let mut p = p;
        check_prob_vector(&p)?;
        renormalize_in_place(&mut p);
        Ok(Pmf { p })
    }

    /// Uniform distribution on `n` symbols.
    pub fn uniform(n: usize) -> Result<Self, CoreError> {
        if n == 0 {
            return Err(CoreError::EmptyPmf);
        }
        Ok(Pmf {
            p: vec![1.0 / n as f64; n],
        })
    }

    /// All mass on symbol `i`.
    pub fn point_mass(n: usize, i: usize) -> Result<Self, CoreError> {
        if n == 0 {
            return Err(CoreError::EmptyPmf);
        }
        if i >= n {
            return Err(CoreError::Dimension {
                context: "point mass index",
                expected: n,
                got: i,
            });
        }
        let mut p = vec![0.0; n];
        p[i] = 1.0;
        Ok(Pmf { p })
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }

    pub fn get(&self, i: usize) -> f64 {
        self.p[i]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.p
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.p.iter()
    }
}

impl std::ops::Index<usize> for Pmf {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.p[i]
    }
}

/// Validates entries and sum without mutating.
pub(crate) fn check_prob_vector(p: &[f64]) -> Result<(), CoreError> {
    if p.is_empty() {
        return Err(CoreError::EmptyPmf);
    }
    for (index, &value) in p.iter().enumerate() {
        if !value.is_finite() || value < 0.0 {
            return Err(CoreError::BadProbability { index, value });
        }
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > PROB_TOL {
        return Err(CoreError::BadSum { sum });
    }
    Ok(())
}

/// Scales a validated vector to sum exactly to 1, but only when the current
/// deviation exceeds [`RENORM_TOL`].
pub(crate) fn renormalize_in_place(p: &mut [f64]) {
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > RENORM_TOL {
        for v in p.iter_mut() {
            *v /= sum;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accepts_exact_distribution() {
        let p = Pmf::new(vec![0.25, 0.75]).unwrap();
        assert_eq!(p.as_slice(), &[0.25, 0.75]);
    }

    #[test]
    fn rejects_bad_sum() {
        let err = Pmf::new(vec![0.5, 0.4]).unwrap_err();
        assert!(matches!(err, CoreError::BadSum { .. }));
    }

    #[test]
    fn rejects_negative_entry() {
        let err = Pmf::new(vec![1.1, -0.1]).unwrap_err();
        assert!(matches!(err, CoreError::BadProbability { index: 1, .. }));
    }

    #[test]
    fn rejects_nan() {
        let err = Pmf::new(vec![f64::NAN, 1.0]).unwrap_err();
        assert!(matches!(err, CoreError::BadProbability { index: 0, .. }));
    }

    #[test]
    fn renormalizes_only_past_threshold() {
        // Deviation 5e-10 is within PROB_TOL but above RENORM_TOL: scaled.
        let p = Pmf::new(vec![0.5, 0.5 + 5e-10]).unwrap();
        let sum: f64 = p.iter().sum();
        assert!((sum - 1.0).abs() < 1e-15);

        // Exact input stays bit-identical.
        let q = Pmf::new(vec![0.1, 0.9]).unwrap();
        assert_eq!(q.as_slice(), &[0.1, 0.9]);
    }

    #[test]
    fn point_mass_and_uniform() {
        let p = Pmf::point_mass(3, 1).unwrap();
        assert_eq!(p.as_slice(), &[0.0, 1.0, 0.0]);
        let u = Pmf::uniform(4).unwrap();
        assert_eq!(u.as_slice(), &[0.25; 4]);
        assert!(Pmf::uniform(0).is_err());
        assert!(Pmf::point_mass(2, 2).is_err());
    }
}
