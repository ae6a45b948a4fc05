use lyrik::trainer::objective::{batch_gradient, batch_loss, Example, Params};
use proptest::prelude::*;

fn case() -> impl Strategy<Value = (Params, Vec<Example>)> {
    (1usize..=8, 2usize..=20, 2usize..=4).prop_flat_map(|(dim, vocab, slots)| {
        let m = vocab * dim;
        let params = (
            prop::collection::vec(-0.5f64..0.5, m),
            prop::collection::vec(prop::collection::vec(-0.3f64..0.3, m), slots),
            prop::collection::vec(-0.5f64..0.5, m),
        )
            .prop_map(move |(main, deltas, context)| Params {
                dim,
                main,
                deltas,
                context,
            });
        let example = (0..vocab, 0..slots, 0..vocab, prop::collection::vec(0..vocab, 1..=5)).prop_map(
            |(word, slot, context, negatives)| Example {
                word,
                slot,
                context,
                negatives,
            },
        );
        (params, prop::collection::vec(example, 1..=6))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn analytic_gradient_matches_central_differences((params, batch) in case()) {
        let h = 1e-5;
        let (loss, grad) = batch_gradient(&params, &batch);
        prop_assert!((loss - batch_loss(&params, &batch)).abs() < 1e-12);
        let analytic = grad.flatten();
        for (k, a) in analytic.iter().enumerate() {
            let shifted = |by: f64| {
                let mut p = params.clone();
                let mut i = 0;
                p.for_each_mut(|v| {
                    if i == k {
                        *v += by;
                    }
                    i += 1;
                });
                batch_loss(&p, &batch)
            };
            let numeric = (shifted(h) - shifted(-h)) / (2.0 * h);
            let scale = a.abs().max(numeric.abs());
            // below this magnitude the difference quotient's rounding error dominates
            if scale < 1e-5 {
                prop_assert!((a - numeric).abs() < 1e-9, "param {k}: {a} vs {numeric}");
            } else {
                prop_assert!((a - numeric).abs() / scale < 1e-4, "param {k}: {a} vs {numeric}");
            }
        }
    }

    #[test]
    fn main_and_delta_gradients_coincide((params, batch) in case()) {
        let (_, grad) = batch_gradient(&params, &batch);
        let summed: Vec<f64> = (0..grad.main.len()).map(|i| grad.deltas.iter().map(|d| d[i]).sum()).collect();
        for (m, s) in grad.main.iter().zip(&summed) {
            prop_assert!((m - s).abs() < 1e-12);
        }
    }
}
