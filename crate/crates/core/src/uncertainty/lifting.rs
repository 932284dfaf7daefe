use super::{Support, UncertaintyError};

fn check(xi: f64, support: Support) -> Result<(), UncertaintyError> {
    let tol = 1e-9 * (1.0 + support.max.abs().max(support.min.abs()));
    if !(xi >= support.min - tol && xi <= support.max + tol) {
        return Err(UncertaintyError::OutOfSupport {
            value: xi,
            min: support.min,
            max: support.max,
        });
    }
    Ok(())
}

/// Piecewise-linear lifting: component `j` measures how much of piece `j` the
/// value has covered, so the components sum to `xi`.
pub fn lift_continuous(xi: f64, breakpoints: &[f64], support: Support) -> Result<Vec<f64>, UncertaintyError> {
    check(xi, support)?;
    Ok(lift_continuous_unchecked(xi, breakpoints))
}

pub(crate) fn lift_continuous_unchecked(xi: f64, p: &[f64]) -> Vec<f64> {
    let r = p.len() + 1;
    if r == 1 {
        return vec![xi];
    }
    let mut out = Vec::with_capacity(r);
    out.push(xi.min(p[0]));
    for j in 1..r - 1 {
        out.push((xi.min(p[j]) - p[j - 1]).max(0.0));
    }
    out.push((xi - p[r - 2]).max(0.0));
    out
}

/// Indicator lifting `1(xi >= p^j)`; a single constant `1` when there are no
/// breakpoints.
pub fn lift_binary(xi: f64, breakpoints: &[f64], support: Support) -> Result<Vec<f64>, UncertaintyError> {
    check(xi, support)?;
    Ok(lift_binary_unchecked(xi, breakpoints))
}

pub(crate) fn lift_binary_unchecked(xi: f64, p: &[f64]) -> Vec<f64> {
    if p.is_empty() {
        return vec![1.0];
    }
    p.iter().map(|&pj| if xi >= pj { 1.0 } else { 0.0 }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const S: Support = Support { min: 0.0, max: 10.0 };

    #[test]
    fn continuous_branches() {
        assert_eq!(lift_continuous(5.0, &[], S).unwrap(), vec![5.0]);
        assert_eq!(lift_continuous(6.0, &[4.0], S).unwrap(), vec![4.0, 2.0]);
        assert_eq!(lift_continuous(2.0, &[3.0, 7.0], S).unwrap(), vec![2.0, 0.0, 0.0]);
        assert_eq!(lift_continuous(8.0, &[3.0, 7.0], S).unwrap(), vec![3.0, 4.0, 1.0]);
    }

    #[test]
    fn binary_branches() {
        assert_eq!(lift_binary(5.0, &[], S).unwrap(), vec![1.0]);
        assert_eq!(lift_binary(6.0, &[4.0], S).unwrap(), vec![1.0]);
        assert_eq!(lift_binary(2.0, &[3.0, 7.0], S).unwrap(), vec![0.0, 0.0]);
        // closed from the left
        assert_eq!(lift_binary(3.0, &[3.0, 7.0], S).unwrap(), vec![1.0, 0.0]);
    }

    #[test]
    fn out_of_support() {
        assert!(matches!(
            lift_continuous(-1.0, &[4.0], S),
            Err(UncertaintyError::OutOfSupport { .. })
        ));
        assert!(lift_binary(10.5, &[4.0], S).is_err());
    }
}
