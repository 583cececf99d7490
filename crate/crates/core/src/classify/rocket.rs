//! Random convolutional kernels and the PPV/max feature transform.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Result, TscvError};

pub const KERNEL_LENGTHS: [usize; 3] = [7, 9, 11];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocketKernel {
    pub length: usize,
    pub weights: Vec<f64>,
    pub bias: f64,
    pub dilation: usize,
    pub centered_padding: bool,
}

impl RocketKernel {
    /// Distance between the first and last tap, `(l - 1) * d`.
    pub fn span(&self) -> usize {
        (self.length - 1) * self.dilation
    }

    fn padding(&self) -> usize {
        if self.centered_padding { self.span() / 2 } else { 0 }
    }

    /// Dilated convolution of one series, including the bias.
    pub fn convolve(&self, x: &[f64]) -> Vec<f64> {
        let n = x.len() as isize;
        let pad = self.padding() as isize;
        let span = self.span() as isize;
        let d = self.dilation as isize;
        let outputs = n + 2 * pad - span;
        (0..outputs.max(0))
            .map(|i| {
                let origin = i - pad;
                let mut acc = self.bias;
                for (j, w) in self.weights.iter().enumerate() {
                    let at = origin + j as isize * d;
                    if (0..n).contains(&at) {
                        acc += w * x[at as usize];
                    }
                }
                acc
            })
            .collect()
    }
}

/// Draws `num_kernels` kernels valid for series of `series_length` samples.
pub fn rocket_generate(num_kernels: usize, series_length: usize, seed: u64) -> Result<Vec<RocketKernel>> {
    if num_kernels == 0 {
        return Err(TscvError::Config("ROCKET needs at least one kernel".into()));
    }
    let longest = *KERNEL_LENGTHS.iter().max().expect("nonempty");
    if series_length < longest {
        return Err(TscvError::Config(format!(
            "series of length {series_length} is shorter than the longest kernel ({longest})"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..num_kernels)
        .map(|_| {
            let length = KERNEL_LENGTHS[rng.random_range(0..KERNEL_LENGTHS.len())];
            let mut weights: Vec<f64> = (0..length).map(|_| StandardNormal.sample(&mut rng)).collect();
            let mean = weights.iter().sum::<f64>() / length as f64;
            weights.iter_mut().for_each(|w| *w -= mean);
            let bias = rng.random_range(-1.0..=1.0);
            let max_exp = ((series_length - 1) as f64 / (length - 1) as f64).log2();
            let mut dilation = 2f64.powf(rng.random_range(0.0..=max_exp)).floor() as usize;
            // guard against powf rounding past the bound
            while dilation > 1 && (length - 1) * dilation > series_length - 1 {
                dilation -= 1;
            }
            let centered_padding = rng.random_bool(0.5);
            RocketKernel { length, weights, bias, dilation: dilation.max(1), centered_padding }
        })
        .collect())
}

/// `(PPV, max)` of a convolution output.
pub fn ppv_max(output: &[f64]) -> (f64, f64) {
    if output.is_empty() {
        return (0.0, 0.0);
    }
    let positive = output.iter().filter(|&&v| v > 0.0).count();
    let max = output.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (positive as f64 / output.len() as f64, max)
}

/// Features of a channel-major `channels x width` window: `(PPV, max)` per
/// kernel, in kernel order. Channel outputs are summed at each position and
/// the bias enters once; since convolution is linear, the window's channels
/// are summed first.
pub fn rocket_transform(window: &[f64], channels: usize, kernels: &[RocketKernel]) -> Result<Vec<f64>> {
    if channels == 0 || window.len() % channels != 0 {
        return Err(TscvError::Shape(format!("{} values do not split into {channels} channels", window.len())));
    }
    let width = window.len() / channels;
    let mut summed = vec![0.0; width];
    for row in window.chunks_exact(width) {
        for (s, v) in summed.iter_mut().zip(row) {
            *s += v;
        }
    }
    let mut features = Vec::with_capacity(2 * kernels.len());
    for kernel in kernels {
        if !kernel.centered_padding && kernel.span() >= width {
            return Err(TscvError::Shape(format!(
                "window of {width} samples is shorter than a kernel span of {}",
                kernel.span() + 1
            )));
        }
        let (ppv, max) = ppv_max(&kernel.convolve(&summed));
        features.push(ppv);
        features.push(max);
    }
    Ok(features)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn generation_is_seeded() {
        let a = rocket_generate(50, 16, 11).unwrap();
        assert_eq!(a, rocket_generate(50, 16, 11).unwrap());
        assert_ne!(a, rocket_generate(50, 16, 12).unwrap());
    }

    #[test]
    fn kernels_respect_bounds() {
        for n in [11, 16, 64, 500] {
            for k in rocket_generate(300, n, n as u64).unwrap() {
                assert!(KERNEL_LENGTHS.contains(&k.length));
                assert!(k.dilation >= 1);
                assert!(k.span() < n, "{k:?} too wide for {n}");
                assert!(k.weights.iter().sum::<f64>().abs() < 1e-9);
                assert!((-1.0..=1.0).contains(&k.bias));
            }
        }
    }

    #[test]
    fn short_series_rejected() {
        assert!(matches!(rocket_generate(10, 10, 0), Err(TscvError::Config(_))));
        assert!(rocket_generate(0, 100, 0).is_err());
    }

    #[test]
    fn ppv_and_max_of_output() {
        assert_eq!(ppv_max(&[-1.0, 0.5, 2.0, -3.0]), (0.5, 2.0));
    }

    #[test]
    fn zero_kernel_gives_zero_features() {
        let k = RocketKernel { length: 7, weights: vec![0.0; 7], bias: 0.0, dilation: 1, centered_padding: false };
        let window: Vec<f64> = (0..32).map(|i| (i as f64).sin()).collect();
        assert_eq!(rocket_transform(&window, 2, &[k]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn dilated_convolution_by_hand() {
        let k = RocketKernel { length: 7, weights: vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0, -1.0], bias: 0.5, dilation: 2, centered_padding: false };
        let x: Vec<f64> = (0..14).map(f64::from).collect();
        // taps at i and i+12: x[i] - x[i+12] + 0.5
        assert_eq!(k.convolve(&x), vec![-11.5, -11.5]);
        let padded = RocketKernel { centered_padding: true, ..k };
        assert_eq!(padded.convolve(&x).len(), 14);
    }

    #[test]
    fn channel_sum_matches_per_channel_outputs() {
        let kernels = rocket_generate(40, 16, 3).unwrap();
        let window: Vec<f64> = (0..48).map(|i| ((i * 7) % 11) as f64 / 10.0).collect();
        let features = rocket_transform(&window, 3, &kernels).unwrap();
        for (kernel, pair) in kernels.iter().zip(features.chunks(2)) {
            let no_bias = RocketKernel { bias: 0.0, ..kernel.clone() };
            let per_channel: Vec<Vec<f64>> = window.chunks(16).map(|row| no_bias.convolve(row)).collect();
            let total: Vec<f64> = (0..per_channel[0].len())
                .map(|i| per_channel.iter().map(|o| o[i]).sum::<f64>() + kernel.bias)
                .collect();
            let (ppv, max) = ppv_max(&total);
            assert_eq!(pair[0], ppv);
            assert!((pair[1] - max).abs() < 1e-12);
        }
    }

    #[test]
    fn window_shorter_than_kernel() {
        let k = RocketKernel { length: 11, weights: vec![0.0; 11], bias: 0.0, dilation: 1, centered_padding: false };
        assert!(matches!(rocket_transform(&[0.0; 8], 1, &[k]), Err(TscvError::Shape(_))));
    }

    proptest! {
        #[test]
        fn zero_window_ppv_follows_bias(seed in any::<u64>()) {
            let kernels = rocket_generate(20, 16, seed).unwrap();
            let f = rocket_transform(&[0.0; 32], 2, &kernels).unwrap();
            for (k, pair) in kernels.iter().zip(f.chunks(2)) {
                if k.bias > 0.0 {
                    prop_assert_eq!(pair[0], 1.0);
                } else if k.bias < 0.0 {
                    prop_assert_eq!(pair[0], 0.0);
                }
                prop_assert!((0.0..=1.0).contains(&pair[0]));
            }
        }
    }
}
