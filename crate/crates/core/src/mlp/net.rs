//! Network representation, forward evaluation and the analytic Jacobian.

use crate::dataset::{DataError, Dataset};
use crate::linalg::Mat;
use crate::scalar::{c, Real};

use super::MlpError;

/// Per-dimension affine map onto [-1, 1], fitted on the training split.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineScale<F> {
    pub center: Vec<F>,
    pub half_range: Vec<F>,
}

impl<F: Real> AffineScale<F> {
    /// Fits the map from the per-dimension min/max of `rows`. A constant
    /// dimension keeps half-range 1 so the map stays invertible.
    pub fn fit(rows: &[Vec<F>]) -> Self {
        let dims = rows.first().map_or(0, Vec::len);
        let two = c::<F>(2.0);
        let mut center = Vec::with_capacity(dims);
        let mut half_range = Vec::with_capacity(dims);
        for d in 0..dims {
            let mut lo = F::infinity();
            let mut hi = F::neg_infinity();
            for row in rows {
                lo = lo.min(row[d]);
                hi = hi.max(row[d]);
            }
            let hr = (hi - lo) / two;
            center.push((hi + lo) / two);
            half_range.push(if hr > F::zero() { hr } else { F::one() });
        }
        AffineScale { center, half_range }
    }

    pub fn fit_scalar(values: &[F]) -> (F, F) {
        let scale = Self::fit(&values.iter().map(|&v| vec![v]).collect::<Vec<_>>());
        (scale.center[0], scale.half_range[0])
    }

    #[inline]
    pub fn normalize_into(&self, x: &[F], out: &mut Vec<F>) {
        out.clear();
        for ((&xi, &ci), &hi) in x.iter().zip(&self.center).zip(&self.half_range) {
            out.push((xi - ci) / hi);
        }
    }
}

/// Training patterns in original units.
#[derive(Debug, Clone, PartialEq)]
pub struct Patterns<F> {
    pub inputs: Vec<Vec<F>>,
    pub targets: Vec<F>,
}

impl<F: Real> Patterns<F> {
    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    /// Extracts the feature columns of a model as input rows plus the target.
    pub fn from_dataset(data: &Dataset<F>, features: &[String]) -> Result<Self, DataError> {
        let cols: Vec<Vec<F>> =
            features.iter().map(|f| data.column(f)).collect::<Result<_, _>>()?;
        let targets = data.column(crate::dataset::TARGET_NAME)?;
        let inputs = (0..targets.len())
            .map(|i| cols.iter().map(|c| c[i]).collect())
            .collect();
        Ok(Patterns { inputs, targets })
    }
}

/// One-hidden-layer perceptron: logistic hidden units, affine output, with
/// the normalization maps stored alongside the weights.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpNet<F> {
    pub n_in: usize,
    pub n_hidden: usize,
    /// Hidden weights, row-major `n_hidden x (n_in + 1)`, bias last.
    pub w1: Vec<F>,
    /// Output weights, `n_hidden + 1`, bias last.
    pub w2: Vec<F>,
    pub input_scale: AffineScale<F>,
    /// Target map as (center, half_range).
    pub target_scale: (F, F),
}

#[inline]
fn sigmoid<F: Real>(z: F) -> F {
    F::one() / (F::one() + (-z).exp())
}

impl<F: Real> MlpNet<F> {
    pub fn n_weights(&self) -> usize {
        self.n_hidden * (self.n_in + 1) + self.n_hidden + 1
    }

    /// Prediction in original target units.
    pub fn forward(&self, x: &[F]) -> Result<F, MlpError> {
        if x.len() != self.n_in {
            return Err(MlpError::DimensionMismatch { expected: self.n_in, got: x.len() });
        }
        let mut xn = Vec::with_capacity(self.n_in);
        self.input_scale.normalize_into(x, &mut xn);
        let yn = self.forward_normalized(&xn, &mut Vec::new());
        let (tc, th) = self.target_scale;
        Ok(yn * th + tc)
    }

    /// Forward pass on a pre-normalized input; `hidden` receives the hidden
    /// activations when the caller needs them for derivatives.
    pub(crate) fn forward_normalized(&self, xn: &[F], hidden: &mut Vec<F>) -> F {
        let cols = self.n_in + 1;
        hidden.clear();
        let mut yn = self.w2[self.n_hidden]; // output bias
        for j in 0..self.n_hidden {
            let row = &self.w1[j * cols..(j + 1) * cols];
            let mut z = row[self.n_in]; // hidden bias
            for (w, &x) in row[..self.n_in].iter().zip(xn) {
                z = z + *w * x;
            }
            let a = sigmoid(z);
            hidden.push(a);
            yn = yn + self.w2[j] * a;
        }
        yn
    }

    /// Flat weight vector in Jacobian order (W1 row-major, then W2).
    pub(crate) fn weights_flat(&self) -> Vec<F> {
        let mut w = self.w1.clone();
        w.extend_from_slice(&self.w2);
        w
    }

    pub(crate) fn with_weights_flat(&self, w: &[F]) -> MlpNet<F> {
        let split = self.w1.len();
        MlpNet {
            n_in: self.n_in,
            n_hidden: self.n_hidden,
            w1: w[..split].to_vec(),
            w2: w[split..].to_vec(),
            input_scale: self.input_scale.clone(),
            target_scale: self.target_scale,
        }
    }
}

/// Analytic Jacobian of the normalized prediction with respect to every
/// weight; one row per input pattern, columns in `weights_flat` order.
pub fn jacobian<F: Real>(net: &MlpNet<F>, inputs: &[Vec<F>]) -> Mat<F> {
    let n_w = net.n_weights();
    let cols = net.n_in + 1;
    let mut jac = Mat::zeros(inputs.len(), n_w);
    let mut xn = Vec::with_capacity(net.n_in);
    let mut hidden = Vec::with_capacity(net.n_hidden);
    for (row_idx, x) in inputs.iter().enumerate() {
        net.input_scale.normalize_into(x, &mut xn);
        net.forward_normalized(&xn, &mut hidden);
        for j in 0..net.n_hidden {
            let a = hidden[j];
            let g = net.w2[j] * a * (F::one() - a); // d yn / d z_j
            for (i, &xi) in xn.iter().enumerate() {
                jac.set(row_idx, j * cols + i, g * xi);
            }
            jac.set(row_idx, j * cols + net.n_in, g); // hidden bias
            jac.set(row_idx, net.w1.len() + j, a); // output weight
        }
        jac.set(row_idx, n_w - 1, F::one()); // output bias
    }
    jac
}

/// Mixes a base seed with two indices into an independent stream seed
/// (splitmix64 finalizer), used to derive per-cell restart seeds.
pub fn mix_seed(seed: u64, a: u64, b: u64) -> u64 {
    let mut z = seed
        ^ a.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ b.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn identity_net(n_in: usize, n_hidden: usize) -> MlpNet<f64> {
        MlpNet {
            n_in,
            n_hidden,
            w1: vec![0.0; n_hidden * (n_in + 1)],
            w2: vec![0.0; n_hidden + 1],
            input_scale: AffineScale {
                center: vec![0.0; n_in],
                half_range: vec![1.0; n_in],
            },
            target_scale: (0.0, 1.0),
        }
    }

    #[test]
    fn zero_hidden_weights_give_half_activations() {
        // All-zero W1, W2 = (2, 0): hidden = sigmoid(0) = 0.5, y = 2*0.5 = 1.
        let mut net = identity_net(2, 1);
        net.w2 = vec![2.0, 0.0];
        let y = net.forward(&[0.3, -0.8]).unwrap();
        assert!((y - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_output_weights_give_denormalized_zero() {
        let mut net = identity_net(3, 4);
        net.w1.iter_mut().enumerate().for_each(|(i, w)| *w = (i as f64 * 0.13).sin());
        net.target_scale = (2.5, 3.0);
        for x in [[0.0, 0.0, 0.0], [1.0, -1.0, 0.4]] {
            let y = net.forward(&x).unwrap();
            assert!((y - 2.5).abs() < 1e-15);
        }
    }

    #[test]
    fn forward_matches_scalar_hand_evaluation() {
        // 2-input 2-hidden net evaluated weight by weight.
        let net = MlpNet {
            n_in: 2,
            n_hidden: 2,
            w1: vec![0.3, -0.2, 0.1, /* row 2 */ -0.5, 0.4, 0.25],
            w2: vec![1.2, -0.7, 0.05],
            input_scale: AffineScale {
                center: vec![0.5, -1.0],
                half_range: vec![2.0, 0.5],
            },
            target_scale: (10.0, 4.0),
        };
        let x = [1.5, -0.8];
        let xn: [f64; 2] = [(1.5 - 0.5) / 2.0, (-0.8 - (-1.0)) / 0.5];
        let z1 = 0.3 * xn[0] - 0.2 * xn[1] + 0.1;
        let z2 = -0.5 * xn[0] + 0.4 * xn[1] + 0.25;
        let a1 = 1.0 / (1.0 + (-z1).exp());
        let a2 = 1.0 / (1.0 + (-z2).exp());
        let yn = 1.2 * a1 - 0.7 * a2 + 0.05;
        let y_hand = yn * 4.0 + 10.0;
        let y = net.forward(&x).unwrap();
        assert!((y - y_hand).abs() < 1e-12, "{y} vs {y_hand}");
    }

    #[test]
    fn forward_rejects_wrong_dimension() {
        let net = identity_net(2, 1);
        assert!(matches!(
            net.forward(&[1.0]),
            Err(MlpError::DimensionMismatch { expected: 2, got: 1 })
        ));
    }

    #[test]
    fn normalization_round_trips() {
        let rows: Vec<Vec<f64>> = vec![vec![-3.0, 10.0], vec![5.0, 20.0], vec![1.0, 12.0]];
        let scale = AffineScale::fit(&rows);
        let mut xn = Vec::new();
        for row in &rows {
            scale.normalize_into(row, &mut xn);
            for (d, &v) in xn.iter().enumerate() {
                assert!((-1.0..=1.0).contains(&v));
                let back = v * scale.half_range[d] + scale.center[d];
                assert!((back - row[d]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn jacobian_output_bias_column_is_one() {
        let mut net = identity_net(2, 3);
        net.w1.iter_mut().enumerate().for_each(|(i, w)| *w = (i as f64 * 0.37).cos() * 0.5);
        net.w2.iter_mut().enumerate().for_each(|(i, w)| *w = (i as f64 * 0.11).sin() * 0.5);
        let rows = vec![vec![0.2, -0.4], vec![-1.0, 1.0]];
        let jac = jacobian(&net, &rows);
        let n_w = net.n_weights();
        for i in 0..rows.len() {
            assert_eq!(jac.get(i, n_w - 1), 1.0);
        }
    }

    #[test]
    fn jacobian_zero_input_row_kills_input_weight_derivatives() {
        let mut net = identity_net(2, 2);
        net.w1 = vec![0.4, -0.3, 0.2, 0.1, 0.5, -0.6];
        net.w2 = vec![0.9, -1.1, 0.3];
        let jac = jacobian(&net, &[vec![0.0, 0.0]]);
        // Non-bias input-weight derivatives vanish for a zero (normalized) input.
        for j in 0..2 {
            for i in 0..2 {
                assert_eq!(jac.get(0, j * 3 + i), 0.0);
            }
            // The hidden-bias derivative is w2_j sigma'(bias_j), nonzero here.
            assert!(jac.get(0, j * 3 + 2).abs() > 0.0);
        }
    }

    #[test]
    fn jacobian_matches_central_finite_differences() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        for _ in 0..10 {
            let n_in = rng.gen_range(1..4usize);
            let n_hidden = rng.gen_range(1..5usize);
            let mut net = identity_net(n_in, n_hidden);
            net.w1.iter_mut().for_each(|w| *w = rng.gen_range(-1.0..1.0));
            net.w2.iter_mut().for_each(|w| *w = rng.gen_range(-1.0..1.0));
            let x: Vec<f64> = (0..n_in).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let jac = jacobian(&net, &[x.clone()]);

            let w0 = net.weights_flat();
            let h = 1e-6;
            for k in 0..net.n_weights() {
                let mut wp = w0.clone();
                wp[k] += h;
                let mut wm = w0.clone();
                wm[k] -= h;
                let mut buf = Vec::new();
                let yp = net.with_weights_flat(&wp).forward_normalized(&x, &mut buf);
                let ym = net.with_weights_flat(&wm).forward_normalized(&x, &mut buf);
                let fd = (yp - ym) / (2.0 * h);
                let an = jac.get(0, k);
                let denom = fd.abs().max(1e-6);
                assert!(
                    ((an - fd) / denom).abs() < 1e-4,
                    "weight {k}: analytic {an} vs fd {fd}"
                );
            }
        }
    }

    #[test]
    fn mix_seed_is_stable_and_spreads() {
        assert_eq!(mix_seed(1, 2, 3), mix_seed(1, 2, 3));
        assert_ne!(mix_seed(1, 2, 3), mix_seed(1, 3, 2));
        assert_ne!(mix_seed(1, 2, 3), mix_seed(2, 2, 3));
    }
}
