//! Matrix exponential by scaling and squaring with diagonal Padé
//! approximants (Higham 2005), for small fixed-size real matrices.

use nalgebra::{Const, DimMin, SMatrix};

#[allow(clippy::excessive_precision)]
const THETA: [(usize, f64); 4] = [
    (3, 1.495585217958292e-2),
    (5, 2.539398330063230e-1),
    (7, 9.504178996162932e-1),
    (9, 2.097847961257068e0),
];
const THETA_13: f64 = 5.371920351148152e0;

const B3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const B5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const B7: [f64; 8] = [17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0];
const B9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const B13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// Maximum absolute column sum.
pub fn norm1<const N: usize>(a: &SMatrix<f64, N, N>) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn pade_low<const N: usize>(a: &SMatrix<f64, N, N>, b: &[f64]) -> (SMatrix<f64, N, N>, SMatrix<f64, N, N>) {
    let id = SMatrix::<f64, N, N>::identity();
    let a2 = a * a;
    let mut power = id;
    let mut u = SMatrix::<f64, N, N>::zeros();
    let mut v = SMatrix::<f64, N, N>::zeros();
    for k in (0..b.len()).step_by(2) {
        v += power * b[k];
        u += power * b[k + 1];
        power *= a2;
    }
    (a * u, v)
}

fn pade13<const N: usize>(a: &SMatrix<f64, N, N>) -> (SMatrix<f64, N, N>, SMatrix<f64, N, N>) {
    let b = &B13;
    let id = SMatrix::<f64, N, N>::identity();
    let a2 = a * a;
    let a4 = a2 * a2;
    let a6 = a4 * a2;
    let u_inner = a6 * (a6 * b[13] + a4 * b[11] + a2 * b[9]) + a6 * b[7] + a4 * b[5] + a2 * b[3] + id * b[1];
    let u = a * u_inner;
    let v = a6 * (a6 * b[12] + a4 * b[10] + a2 * b[8]) + a6 * b[6] + a4 * b[4] + a2 * b[2] + id * b[0];
    (u, v)
}

fn solve<const N: usize>(u: SMatrix<f64, N, N>, v: SMatrix<f64, N, N>) -> SMatrix<f64, N, N>
where
    Const<N>: DimMin<Const<N>, Output = Const<N>>,
{
    let p = v + u;
    let q = v - u;
    q.lu().solve(&p).expect("Padé denominator is nonsingular for scaled arguments")
}

/// `exp(A)`. Non-finite inputs propagate to non-finite outputs.
pub fn expm<const N: usize>(a: &SMatrix<f64, N, N>) -> SMatrix<f64, N, N>
where
    Const<N>: DimMin<Const<N>, Output = Const<N>>,
{
    let norm = norm1(a);
    if !norm.is_finite() {
        return SMatrix::from_element(f64::NAN);
    }
    for (m, theta) in THETA {
        if norm <= theta {
            let b: &[f64] = match m {
                3 => &B3,
                5 => &B5,
                7 => &B7,
                _ => &B9,
            };
            let (u, v) = pade_low(a, b);
            return solve(u, v);
        }
    }
    let s = libm::ceil(libm::log2(norm / THETA_13)).max(0.0) as i32;
    let scaled = a * libm::exp2(-(s as f64));
    let (u, v) = pade13(&scaled);
    let mut r = solve(u, v);
    for _ in 0..s {
        r = r * r;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{Matrix2, Matrix3};

    #[test]
    fn zero_is_identity() {
        let e = expm(&Matrix3::<f64>::zeros());
        assert_eq!(e, Matrix3::identity());
    }

    #[test]
    fn rotation() {
        for &theta in &[1e-4, 0.3, 2.0, 7.5, 40.0] {
            let a = Matrix2::new(0.0, theta, -theta, 0.0);
            let e = expm(&a);
            let (s, c) = (libm::sin(theta), libm::cos(theta));
            let expected = Matrix2::new(c, s, -s, c);
            assert!((e - expected).amax() < 1e-13 * (1.0 + theta), "theta={theta}");
        }
    }

    #[test]
    fn nilpotent_is_exact_polynomial() {
        let a = Matrix3::new(0.0, 3.0, 5.0, 0.0, 0.0, 7.0, 0.0, 0.0, 0.0);
        let expected = Matrix3::identity() + a + a * a * 0.5;
        assert!((expm(&a) - expected).amax() < 1e-13);
    }

    #[test]
    fn diagonal() {
        let a = Matrix3::from_diagonal(&nalgebra::Vector3::new(-3.0, 0.5, 12.0));
        let e = expm(&a);
        for (i, v) in [-3.0f64, 0.5, 12.0].iter().enumerate() {
            let want = libm::exp(*v);
            assert!((e[(i, i)] - want).abs() < 1e-13 * want);
        }
    }

    #[test]
    fn inverse_property() {
        let a = Matrix3::new(0.3, -1.2, 0.7, 2.0, 0.1, -0.4, 0.5, 0.9, -0.8) * 3.0;
        let prod = expm(&a) * expm(&(-a));
        assert!((prod - Matrix3::identity()).amax() < 1e-11);
    }
}
