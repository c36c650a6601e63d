use ensemble_forge::data::Dataset;
use ensemble_forge::ids::{Activation, ClassifierSpec, LearningRate};
use ensemble_forge::mlp::{train, MlpNetwork};
use ensemble_forge::seed::stream_rng;
use rand::Rng;

/// Two well-separated clusters on either side of x + y = 1.
fn separable_toy() -> Dataset {
    let mut rng = stream_rng(17, 0);
    let mut features = Vec::new();
    let mut labels = Vec::new();
    while labels.len() < 80 {
        let (x, y): (f64, f64) = (rng.random(), rng.random());
        let s = x + y - 1.0;
        if s.abs() < 0.3 {
            continue;
        }
        features.extend_from_slice(&[x, y]);
        labels.push(u8::from(s > 0.0));
    }
    Dataset::new(features, labels, vec!["x".into(), "y".into()]).unwrap()
}

// Brute-force search over directions and offsets for a separating line.
fn has_linear_separator(data: &Dataset) -> bool {
    (0..360).any(|deg| {
        let t = (deg as f64).to_radians();
        let (a, b) = (t.cos(), t.sin());
        let proj: Vec<f64> = data.rows().map(|r| a * r[0] + b * r[1]).collect();
        let max0 = proj
            .iter()
            .zip(data.labels())
            .filter(|(_, &l)| l == 0)
            .map(|(p, _)| *p)
            .fold(f64::NEG_INFINITY, f64::max);
        let min1 = proj
            .iter()
            .zip(data.labels())
            .filter(|(_, &l)| l == 1)
            .map(|(p, _)| *p)
            .fold(f64::INFINITY, f64::min);
        max0 < min1
    })
}

#[test]
fn separable_toy_is_learned_exactly() {
    let data = separable_toy();
    assert!(has_linear_separator(&data));
    for activation in Activation::ALL {
        let spec = ClassifierSpec::mlp(10, activation, LearningRate::Lr003);
        let trained = train(&spec, &data, &mut stream_rng(3, 1), 500).unwrap();
        let err = trained.network.classification_error(&data).unwrap();
        assert_eq!(err, 0.0, "{activation:?} left training error {err}");
    }
}

#[test]
fn training_is_bit_reproducible() {
    let data = separable_toy();
    let spec = ClassifierSpec::mlp(12, Activation::Softmax, LearningRate::Lr002);
    let a = train(&spec, &data, &mut stream_rng(9, 0), 50).unwrap();
    let b = train(&spec, &data, &mut stream_rng(9, 0), 50).unwrap();
    let bits = |n: &MlpNetwork| n.parameters().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
    assert_eq!(bits(&a.network), bits(&b.network));
    assert_eq!(a.final_loss.to_bits(), b.final_loss.to_bits());
}

#[test]
fn small_step_descent_never_increases_loss() {
    let data = separable_toy();
    for activation in Activation::ALL {
        let mut net = MlpNetwork::random(2, 6, activation, 0.01, &mut stream_rng(21, 0));
        let losses = net.fit(&data, 300).unwrap();
        for (epoch, w) in losses.windows(2).enumerate() {
            assert!(
                w[1] <= w[0] + 1e-9,
                "{activation:?}: loss rose from {} to {} at epoch {}",
                w[0],
                w[1],
                epoch + 1
            );
        }
    }
}
