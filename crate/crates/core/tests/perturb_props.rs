use ltrkit_core::features::FeatureMatrix;
use ltrkit_core::perturb::{spec_augment_with_masks, speed_output_len, speed_perturb, SpecAugmentPolicy};
use ltrkit_core::AudioBuffer;
use proptest::prelude::*;

proptest! {
    #[test]
    fn speed_length_and_identity(n in 1usize..5000, factor in 0.5f64..2.0) {
        let b = AudioBuffer::new((0..n).map(|i| ((i % 17) as f32 - 8.0) / 10.0).collect(), 16000).unwrap();
        let out = speed_perturb(&b, factor);
        let expect = (n as f64 / factor).round() as usize;
        prop_assert_eq!(speed_output_len(n, factor), expect);
        match out {
            Ok(o) => {
                prop_assert_eq!(o.len(), expect);
                prop_assert!(o.samples().iter().all(|s| s.abs() <= 0.8));
            }
            Err(_) => prop_assert_eq!(expect, 0),
        }
        prop_assert_eq!(speed_perturb(&b, 1.0).unwrap(), b);
    }

    #[test]
    fn masking_invariants(
        frames in 1usize..200,
        dims in 1usize..40,
        nf in 0usize..4,
        wf in 0usize..50,
        nt in 0usize..4,
        frac in 0.0f64..=1.0,
        seed in any::<u64>(),
    ) {
        let values: Vec<f64> = (0..frames * dims).map(|i| i as f64 + 0.5).collect();
        let m = FeatureMatrix::new(values, frames, dims).unwrap();
        let policy = SpecAugmentPolicy {
            num_freq_masks: nf,
            max_freq_mask_width: wf,
            num_time_masks: nt,
            max_time_mask_fraction: frac,
            seed,
        };
        let (out, masks) = spec_augment_with_masks(&m, &policy).unwrap();
        prop_assert_eq!(out.shape(), m.shape());
        let (again, _) = spec_augment_with_masks(&m, &policy).unwrap();
        prop_assert_eq!(&again, &out);

        let area: usize = masks
            .iter()
            .map(|k| match k.axis {
                ltrkit_core::perturb::MaskAxis::Frequency => k.width * frames,
                ltrkit_core::perturb::MaskAxis::Time => k.width * dims,
            })
            .sum();
        let zeroed = out.values().iter().filter(|&&v| v == 0.0).count();
        prop_assert!(zeroed <= area);
        for (a, b) in m.values().iter().zip(out.values()) {
            prop_assert!(*b == 0.0 || a.to_bits() == b.to_bits());
        }
    }
}
