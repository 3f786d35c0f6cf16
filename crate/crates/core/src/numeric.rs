//! Floating-point utilities: polynomial germs, Newton solvers, finite
//! differences and small dense linear algebra.

use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Polynomial germ `c0 + c1 t + c2 t^2 + ...`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Germ<T> {
    pub coeffs: Vec<T>,
}

impl<T: Float> Germ<T> {
    pub fn new(coeffs: Vec<T>) -> Self {
        Germ { coeffs }
    }

    /// Germ whose derivatives at `t = 0` are the given jet.
    pub fn from_jet(jet: &[T]) -> Self {
        let mut fact = T::one();
        let mut coeffs = Vec::with_capacity(jet.len());
        for (i, d) in jet.iter().enumerate() {
            if i > 0 {
                fact = fact * T::from(i).unwrap();
            }
            coeffs.push(*d / fact);
        }
        Germ { coeffs }
    }

    /// `j`-th derivative at `t`.
    pub fn derivative(&self, j: usize, t: T) -> T {
        let mut acc = T::zero();
        for i in (j..self.coeffs.len()).rev() {
            let mut falling = T::one();
            for m in 0..j {
                falling = falling * T::from(i - m).unwrap();
            }
            acc = acc * t + self.coeffs[i] * falling;
        }
        acc
    }

    pub fn value(&self, t: T) -> T {
        self.derivative(0, t)
    }

    /// Derivatives of orders `0..=n` at `t`.
    pub fn jet(&self, n: usize, t: T) -> Vec<T> {
        (0..=n).map(|j| self.derivative(j, t)).collect()
    }
}

/// Settings shared by the Newton solvers.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NewtonSettings {
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for NewtonSettings {
    fn default() -> Self {
        NewtonSettings { max_iter: 50, tol: 1e-12 }
    }
}

/// Damped scalar Newton iteration for `f(x) = 0` with derivative `df`.
/// Steps are halved until the residual decreases.
pub fn newton_1d<T: Float>(
    f: impl Fn(T) -> Option<T>,
    df: impl Fn(T) -> Option<T>,
    x0: T,
    s: NewtonSettings,
) -> Result<(T, usize)> {
    let tol = T::from(s.tol).unwrap();
    let mut x = x0;
    let mut fx = f(x).ok_or_else(|| Error::Numeric("residual undefined at the initial guess".into()))?;
    for it in 0..s.max_iter {
        if fx.abs() <= tol {
            return Ok((x, it));
        }
        let d = df(x)
            .filter(|d| *d != T::zero() && d.is_finite())
            .ok_or_else(|| Error::Numeric(format!("vanishing derivative at x = {:?}", x.to_f64())))?;
        let step = fx / d;
        let mut lambda = T::one();
        loop {
            let cand = x - lambda * step;
            match f(cand) {
                Some(fc) if fc.abs() < fx.abs() || lambda < T::from(1e-6).unwrap() => {
                    x = cand;
                    fx = fc;
                    break;
                }
                _ => {}
            }
            lambda = lambda / T::from(2).unwrap();
            if lambda < T::from(1e-9).unwrap() {
                return Err(Error::Numeric(format!(
                    "damped Newton stalled at x = {:?}, |f| = {:?}",
                    x.to_f64(),
                    fx.abs().to_f64()
                )));
            }
        }
    }
    if fx.abs() <= tol {
        return Ok((x, s.max_iter));
    }
    Err(Error::Numeric(format!("Newton did not converge in {} iterations (|f| = {:?})", s.max_iter, fx.abs().to_f64())))
}

/// Damped Newton on `F: R^2 -> R^2` with a forward-difference Jacobian.
pub fn newton_2d(
    f: impl Fn([f64; 2]) -> Option<[f64; 2]>,
    x0: [f64; 2],
    s: NewtonSettings,
) -> Result<([f64; 2], usize)> {
    let norm = |v: [f64; 2]| v[0].abs().max(v[1].abs());
    let mut x = x0;
    let mut fx = f(x).ok_or_else(|| Error::Numeric("residual undefined at the initial guess".into()))?;
    for it in 0..s.max_iter {
        if norm(fx) <= s.tol {
            return Ok((x, it));
        }
        let mut jac = [[0.0; 2]; 2];
        for j in 0..2 {
            let h = 1e-7 * x[j].abs().max(1.0);
            let mut xp = x;
            xp[j] += h;
            let mut xm = x;
            xm[j] -= h;
            let fp = f(xp).ok_or_else(|| Error::Numeric("Jacobian probe left the domain".into()))?;
            let fm = f(xm).ok_or_else(|| Error::Numeric("Jacobian probe left the domain".into()))?;
            for i in 0..2 {
                jac[i][j] = (fp[i] - fm[i]) / (2.0 * h);
            }
        }
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        if det == 0.0 || !det.is_finite() {
            return Err(Error::Numeric("singular Jacobian in 2D Newton".into()));
        }
        let step = [(jac[1][1] * fx[0] - jac[0][1] * fx[1]) / det, (-jac[1][0] * fx[0] + jac[0][0] * fx[1]) / det];
        let mut lambda = 1.0;
        loop {
            let cand = [x[0] - lambda * step[0], x[1] - lambda * step[1]];
            match f(cand) {
                Some(fc) if norm(fc) < norm(fx) || lambda < 1e-6 => {
                    x = cand;
                    fx = fc;
                    break;
                }
                _ => {}
            }
            lambda *= 0.5;
            if lambda < 1e-9 {
                return Err(Error::Numeric("2D damped Newton stalled".into()));
            }
        }
    }
    if norm(fx) <= s.tol {
        return Ok((x, s.max_iter));
    }
    Err(Error::Numeric(format!("2D Newton did not converge (|F| = {:e})", norm(fx))))
}

/// Richardson-extrapolated central difference of `f` at `t` with base step `h`.
pub fn richardson<T: Float>(f: impl Fn(T) -> Option<T>, t: T, h: T) -> Option<T> {
    let two = T::from(2).unwrap();
    let central = |h: T| Some((f(t + h)? - f(t - h)?) / (two * h));
    let d1 = central(h)?;
    let d2 = central(h / two)?;
    Some((T::from(4).unwrap() * d2 - d1) / T::from(3).unwrap())
}

/// Finite-difference weights for derivatives `0..=m` at `z` on `nodes`.
/// Returns `w[k][j]`: weight of node `j` for the `k`-th derivative.
pub fn fornberg_weights(z: f64, nodes: &[f64], m: usize) -> Vec<Vec<f64>> {
    let n = nodes.len();
    let mut c = vec![vec![0.0; n]; m + 1];
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - z;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

fn eliminate_below<T: Float>(pivot: &[T], rows: &mut [Vec<T>], col: usize) {
    for row in rows {
        let f = row[col] / pivot[col];
        for (x, &p) in row[col..].iter_mut().zip(&pivot[col..]) {
            *x = *x - f * p;
        }
    }
}

/// Determinant by Gaussian elimination with partial pivoting.
pub fn determinant<T: Float>(mut a: Vec<Vec<T>>) -> T {
    let n = a.len();
    let mut det = T::one();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap_or(std::cmp::Ordering::Equal))
            .unwrap();
        if a[piv][col] == T::zero() {
            return T::zero();
        }
        if piv != col {
            a.swap(piv, col);
            det = -det;
        }
        det = det * a[col][col];
        let (top, rest) = a.split_at_mut(col + 1);
        eliminate_below(&top[col], rest, col);
    }
    det
}

/// Numerical rank with pivots below `rel_tol * max|a|` treated as zero.
pub fn rank<T: Float>(mut a: Vec<Vec<T>>, rel_tol: T) -> usize {
    let rows = a.len();
    if rows == 0 {
        return 0;
    }
    let cols = a[0].len();
    let scale = a.iter().flatten().fold(T::zero(), |m, v| m.max(v.abs()));
    if scale == T::zero() {
        return 0;
    }
    let tol = rel_tol * scale;
    let mut r = 0;
    for col in 0..cols {
        if r == rows {
            break;
        }
        let piv = (r..rows)
            .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap_or(std::cmp::Ordering::Equal))
            .unwrap();
        if a[piv][col].abs() <= tol {
            continue;
        }
        a.swap(piv, r);
        let (top, rest) = a.split_at_mut(r + 1);
        eliminate_below(&top[r], rest, col);
        r += 1;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn germ_jets() {
        let g = Germ::from_jet(&[1.0, 2.0, 6.0]);
        assert_eq!(g.coeffs, vec![1.0, 2.0, 3.0]);
        assert_eq!(g.derivative(1, 1.0), 8.0);
        assert_eq!(g.derivative(2, 5.0), 6.0);
        assert_eq!(g.derivative(3, 5.0), 0.0);
    }

    #[test]
    fn newton_sqrt2() {
        let (x, _) = newton_1d(|x: f64| Some(x * x - 2.0), |x| Some(2.0 * x), 1.0, NewtonSettings::default()).unwrap();
        assert!((x - 2f64.sqrt()).abs() < 1e-12);
        let (x32, _) =
            newton_1d(|x: f32| Some(x * x - 2.0), |x| Some(2.0 * x), 1.0, NewtonSettings { max_iter: 50, tol: 1e-6 })
                .unwrap();
        assert!((x32 - 2f32.sqrt()).abs() < 1e-6);
    }

    #[test]
    fn newton_reports_failure() {
        assert!(newton_1d(|x: f64| Some(x * x + 1.0), |x| Some(2.0 * x), 1.0, NewtonSettings::default()).is_err());
    }

    #[test]
    fn newton_plane() {
        let (x, _) =
            newton_2d(|v| Some([v[0] + v[1] - 3.0, v[0] * v[1] - 2.0]), [0.5, 2.5], NewtonSettings::default()).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-10 && (x[1] - 2.0).abs() < 1e-10);
    }

    #[test]
    fn fornberg_central() {
        let w = fornberg_weights(0.0, &[-1.0, 0.0, 1.0], 2);
        assert_eq!(w[1], vec![-0.5, 0.0, 0.5]);
        assert_eq!(w[2], vec![1.0, -2.0, 1.0]);
    }

    #[test]
    fn dense_linear_algebra() {
        assert!((determinant(vec![vec![1.0, 2.0], vec![3.0, 4.0]]) + 2.0f64).abs() < 1e-12);
        assert_eq!(rank(vec![vec![1.0, 2.0], vec![2.0, 4.0]], 1e-10), 1);
        assert!((richardson(|t: f64| Some(t.sin()), 0.3, 1e-2).unwrap() - 0.3f64.cos()).abs() < 1e-9);
    }
}
