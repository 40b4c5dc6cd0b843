use std::f64::consts::PI;

use ltrkit_core::features::{fbank, hz_to_mel, mel_to_hz, mvn, FeatureMatrix, FrontEnd, MelFilterbank};
use ltrkit_core::AudioBuffer;
use proptest::prelude::*;

fn sine(freq: f64, seconds: f64, rate: u32) -> AudioBuffer {
    let n = (seconds * f64::from(rate)) as usize;
    let s = (0..n)
        .map(|i| (0.5 * (2.0 * PI * freq * i as f64 / f64::from(rate)).sin()) as f32)
        .collect();
    AudioBuffer::new(s, rate).unwrap()
}

/// Filter energies of one frame from a direct DFT and independently built
/// triangles: pre-emphasis, Hamming window, zero-padding to 512.
fn reference_band_energies(frame: &[f32], rate: f64, bands: usize) -> Vec<f64> {
    let n = frame.len();
    let nfft = 512;
    let x: Vec<f64> = (0..n)
        .map(|i| {
            let pre = if i == 0 {
                0.03 * f64::from(frame[0])
            } else {
                f64::from(frame[i]) - 0.97 * f64::from(frame[i - 1])
            };
            pre * (0.54 - 0.46 * (2.0 * PI * i as f64 / (n - 1) as f64).cos())
        })
        .collect();
    let mag: Vec<f64> = (0..=nfft / 2)
        .map(|k| {
            let (re, im) = x.iter().enumerate().fold((0.0, 0.0), |(re, im), (t, v)| {
                let ang = 2.0 * PI * (k * t) as f64 / nfft as f64;
                (re + v * ang.cos(), im - v * ang.sin())
            });
            (re * re + im * im).sqrt()
        })
        .collect();
    let top = 2595.0 * (1.0 + rate / 2.0 / 700.0).log10();
    let edge = |i: usize| 700.0 * (10f64.powf(top * i as f64 / (bands + 1) as f64 / 2595.0) - 1.0);
    (0..bands)
        .map(|m| {
            let (lo, c, hi) = (edge(m), edge(m + 1), edge(m + 2));
            mag.iter()
                .enumerate()
                .map(|(k, a)| {
                    let f = k as f64 * rate / nfft as f64;
                    let w = if f > lo && f <= c {
                        (f - lo) / (c - lo)
                    } else if f > c && f < hi {
                        (hi - f) / (hi - c)
                    } else {
                        0.0
                    };
                    w * a
                })
                .sum()
        })
        .collect()
}

fn argmax(v: &[f64]) -> usize {
    v.iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |b, (i, &x)| if x > b.1 { (i, x) } else { b })
        .0
}

#[test]
fn sine_peak_lands_in_its_band() {
    let b = sine(440.0, 1.0, 16000);
    let fe = FrontEnd::default();
    let feats = fbank(&b, &fe).unwrap();
    let bank = MelFilterbank::new(80, 512, 16000);
    let frames = feats.frames();
    for t in 1..frames - 1 {
        let peak = argmax(feats.row(t));
        let (lo, _, hi) = bank.band_edges_hz(peak);
        assert!(lo < 440.0 && 440.0 < hi, "frame {t}: band {peak} spans {lo}..{hi}");

        let reference = reference_band_energies(&b.samples()[t * 160..t * 160 + 400], 16000.0, 80);
        assert_eq!(peak, argmax(&reference), "frame {t}");
        for (got, want) in feats.row(t).iter().zip(&reference) {
            assert!((got - want.max(1e-10).ln()).abs() < 1e-6);
        }
    }
}

#[test]
fn mel_formula() {
    assert!((hz_to_mel(700.0) - 2595.0 * 2f64.log10()).abs() < 1e-12);
    assert!((mel_to_hz(hz_to_mel(3000.0)) - 3000.0).abs() < 1e-9);
}

fn random_matrix() -> impl Strategy<Value = FeatureMatrix> {
    (2usize..40, 1usize..8).prop_flat_map(|(f, d)| {
        prop::collection::vec(-20.0f64..20.0, f * d).prop_map(move |v| FeatureMatrix::new(v, f, d).unwrap())
    })
}

fn assert_close(a: &FeatureMatrix, b: &FeatureMatrix, tol: f64) -> Result<(), TestCaseError> {
    for (x, y) in a.values().iter().zip(b.values()) {
        prop_assert!((x - y).abs() < tol, "{} vs {}", x, y);
    }
    Ok(())
}

proptest! {
    #[test]
    fn frame_count_formula(n in 400usize..40000) {
        let b = AudioBuffer::new(vec![0.01; n], 16000).unwrap();
        let m = fbank(&b, &FrontEnd { dims: 8, ..FrontEnd::default() }).unwrap();
        prop_assert_eq!(m.frames(), 1 + (n - 400) / 160);
        let floor = 1e-10f64.ln();
        prop_assert!(m.values().iter().all(|&v| v >= floor));
    }

    #[test]
    fn mvn_idempotent_and_affine_invariant(m in random_matrix(), scale in 0.1f64..10.0, shift in -50.0f64..50.0) {
        let once = mvn(&m);
        assert_close(&mvn(&once), &once, 1e-6)?;
        let moved = FeatureMatrix::new(m.values().iter().map(|v| scale * v + shift).collect(), m.frames(), m.dims()).unwrap();
        assert_close(&mvn(&moved), &once, 1e-6)?;
    }
}
