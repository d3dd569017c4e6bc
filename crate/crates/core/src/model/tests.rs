use super::*;
use crate::series::FeatureWindow;

fn small(cell: CellKind) -> AeConfig {
    AeConfig {
        n_signals: 3,
        window: 4,
        encoder_widths: vec![8, 4],
        decoder_widths: vec![4, 8],
        cell,
        batch_size: 4,
        max_epochs: 3,
        ..AeConfig::default()
    }
}

fn sine_windows(n_signals: usize, w: usize, count: usize) -> Vec<FeatureWindow> {
    (0..count)
        .map(|k| {
            let mut data = Vec::with_capacity(n_signals * w);
            for i in 0..n_signals {
                for t in 0..w {
                    let step = (k * w + t) as f64;
                    data.push(0.5 + 0.4 * (step * 0.3 + i as f64).sin());
                }
            }
            FeatureWindow::new(k * w, w, data).unwrap()
        })
        .collect()
}

#[test]
fn init_is_deterministic_per_seed() {
    let c = small(CellKind::Lstm);
    assert_eq!(
        ModelState::init(&c, 4).unwrap(),
        ModelState::init(&c, 4).unwrap()
    );
    assert_ne!(
        ModelState::init(&c, 4).unwrap().params,
        ModelState::init(&c, 5).unwrap().params
    );
}

#[test]
fn default_parameter_counts() {
    // LSTM: 4h(in+h+1) per layer, 37->370->185 | 185->185->370, output 370->37
    // 603840 + 411440 + 274540 + 822880 + 13727
    let lstm = AeConfig::default();
    assert_eq!(lstm.parameter_count(), 2_126_427);
    // Dense: out(in+1) per layer, 370->370->185->185->370->370
    // 137270 + 68635 + 34410 + 68820 + 137270
    let dense = AeConfig {
        cell: CellKind::Dense,
        ..AeConfig::default()
    };
    assert_eq!(dense.parameter_count(), 446_405);
    let state = ModelState::init(&dense, 0).unwrap();
    assert_eq!(state.parameter_count(), 446_405);
}

#[test]
fn default_architecture_output_length() {
    let state = ModelState::init(&AeConfig::default(), 0).unwrap();
    assert_eq!(state.parameter_count(), 2_126_427);
    let fw = FeatureWindow::new(0, 10, vec![0.5; 370]).unwrap();
    let out = state.forward(&[fw], false, 0).unwrap();
    assert_eq!(out[0].data.len(), 370);
    assert!(out[0].data.iter().all(|v| v.is_finite()));
}

#[test]
fn invalid_configs_rejected() {
    let mut c = small(CellKind::Lstm);
    c.decoder_widths.clear();
    assert!(matches!(ModelState::init(&c, 0), Err(Error::Config(_))));
    let mut c = small(CellKind::Lstm);
    c.encoder_widths[1] = 0;
    assert!(ModelState::init(&c, 0).is_err());
    let mut c = small(CellKind::Lstm);
    c.dropout_rate = 1.0;
    assert!(ModelState::init(&c, 0).is_err());
}

#[test]
fn forward_rejects_wrong_shape() {
    let state = ModelState::init(&small(CellKind::Lstm), 0).unwrap();
    let fw = FeatureWindow::new(0, 4, vec![0.0; 8]).unwrap();
    assert!(matches!(
        state.forward(&[fw], false, 0),
        Err(Error::Dimension { .. })
    ));
}

#[test]
fn eval_forward_is_pure() {
    let state = ModelState::init(&small(CellKind::Lstm), 1).unwrap();
    let before = state.clone();
    let batch = sine_windows(3, 4, 5);
    let a = state.forward(&batch, false, 0).unwrap();
    let b = state.forward(&batch, false, 0).unwrap();
    assert_eq!(a, b);
    assert_eq!(state, before);
}

#[test]
fn loss_examples() {
    let ones = FeatureWindow::new(0, 10, vec![1.0; 370]).unwrap();
    let zeros = FeatureWindow::new(0, 10, vec![0.0; 370]).unwrap();
    assert_eq!(
        loss(std::slice::from_ref(&ones), std::slice::from_ref(&ones)).unwrap(),
        0.0
    );
    assert_eq!(
        loss(std::slice::from_ref(&ones), std::slice::from_ref(&zeros)).unwrap(),
        1.0
    );
    // direct-sum oracle
    let a = sine_windows(3, 4, 2);
    let b: Vec<_> = a
        .iter()
        .map(|w| FeatureWindow::new(0, 4, w.data.iter().map(|v| v * 0.7 + 0.1).collect()).unwrap())
        .collect();
    let mut sum = 0.0;
    for (x, y) in a.iter().zip(&b) {
        sum += x
            .data
            .iter()
            .zip(&y.data)
            .map(|(p, q)| (p - q).powi(2))
            .sum::<f64>()
            / 12.0;
    }
    assert!((loss(&a, &b).unwrap() - sum / 2.0).abs() < 1e-15);
}

#[test]
fn zero_epochs_returns_initial_state() {
    let mut c = small(CellKind::Lstm);
    c.max_epochs = 0;
    let (state, hist) = train(&c, &sine_windows(3, 4, 10)).unwrap();
    assert_eq!(
        state,
        ModelState::init(&c, crate::seed::derive_seed(c.rng_seed, &[0])).unwrap()
    );
    assert!(hist.epochs.is_empty());
}

#[test]
fn training_converges_on_sine_data() {
    for cell in [CellKind::Lstm, CellKind::Dense] {
        let config = AeConfig {
            n_signals: 4,
            window: 10,
            encoder_widths: vec![20, 10],
            decoder_widths: vec![10, 20],
            cell,
            dropout_rate: 0.0,
            learning_rate: 0.003,
            max_epochs: 40,
            early_stop_patience: 40,
            ..AeConfig::default()
        };
        let windows = sine_windows(4, 10, 120);
        let (_, hist) = train(&config, &windows).unwrap();
        let initial = hist.initial_train_loss.unwrap();
        let last = hist.epochs.last().unwrap().train_loss;
        assert!(last < 0.1 * initial, "{cell:?}: {initial} -> {last}");
    }
}

#[test]
fn training_is_deterministic_and_returns_best_state() {
    let c = AeConfig {
        max_epochs: 6,
        ..small(CellKind::Lstm)
    };
    let windows = sine_windows(3, 4, 40);
    let (s1, h1) = train(&c, &windows).unwrap();
    let (s2, h2) = train(&c, &windows).unwrap();
    assert_eq!(s1, s2);
    assert_eq!(h1, h2);
    let min_val = h1
        .epochs
        .iter()
        .map(|e| e.val_loss)
        .fold(f64::INFINITY, f64::min);
    assert_eq!(s1.best_val_loss, min_val);
    assert_eq!(Some(s1.epoch), h1.best_epoch);
    // the returned state reproduces its recorded validation loss
    let val = &windows[windows.len() - h1.validation_windows..];
    assert_eq!(s1.evaluate(val).unwrap(), min_val);
}

#[test]
fn fewer_windows_than_batch_size() {
    let c = AeConfig {
        batch_size: 64,
        ..small(CellKind::Dense)
    };
    let (_, hist) = train(&c, &sine_windows(3, 4, 5)).unwrap();
    assert_eq!(hist.epochs.len(), 3);
}

#[test]
fn save_load_roundtrip_is_bit_exact() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.bin");
    let c = small(CellKind::Lstm);
    let (mut state, _) = train(&c, &sine_windows(3, 4, 20)).unwrap();
    state.provenance = Some("abc".into());
    save(&state, &path).unwrap();
    let loaded = load(&path).unwrap();
    assert_eq!(loaded, state);
    let batch = sine_windows(3, 4, 3);
    assert_eq!(
        loaded.forward(&batch, false, 0).unwrap(),
        state.forward(&batch, false, 0).unwrap()
    );
}

#[test]
fn truncated_or_corrupt_file_fails_integrity() {
    let state = ModelState::init(&small(CellKind::Dense), 0).unwrap();
    let bytes = persist::to_bytes(&state).unwrap();
    assert!(matches!(
        persist::from_bytes(&bytes[..bytes.len() - 9]),
        Err(Error::Integrity(_))
    ));
    let mut flipped = bytes.clone();
    let mid = flipped.len() / 2;
    flipped[mid] ^= 0x40;
    assert!(matches!(
        persist::from_bytes(&flipped),
        Err(Error::Integrity(_))
    ));
    assert!(matches!(
        persist::from_bytes(b"nonsense"),
        Err(Error::Integrity(_))
    ));
}

#[test]
fn version_mismatch_is_explicit() {
    let state = ModelState::init(&small(CellKind::Dense), 0).unwrap();
    let mut bytes = persist::to_bytes(&state).unwrap();
    bytes[8..12].copy_from_slice(&7u32.to_le_bytes());
    let body = bytes.len() - 4;
    let crc = crc32fast::hash(&bytes[..body]);
    bytes[body..].copy_from_slice(&crc.to_le_bytes());
    assert!(matches!(
        persist::from_bytes(&bytes),
        Err(Error::UnsupportedVersion {
            found: 7,
            supported: 1
        })
    ));
}

#[test]
fn search_budget_one_returns_sampled_config() {
    let base = small(CellKind::Dense);
    let space = SearchSpace {
        learning_rates: vec![0.01],
        ..SearchSpace::singleton(&base)
    };
    let r = random_search(&base, &space, 1, 1, &sine_windows(3, 4, 20), 3).unwrap();
    assert_eq!(r.trials.len(), 1);
    assert_eq!(r.best.learning_rate, 0.01);
    assert_eq!(r.best.max_epochs, base.max_epochs);
}

#[test]
fn search_rejects_empty_space() {
    let base = small(CellKind::Dense);
    let space = SearchSpace {
        batch_sizes: vec![],
        ..SearchSpace::singleton(&base)
    };
    assert!(matches!(
        random_search(&base, &space, 2, 1, &sine_windows(3, 4, 20), 3),
        Err(Error::Config(_))
    ));
}

#[test]
fn search_keeps_lowest_validation_loss() {
    // A learning rate of 1e-9 leaves the weights essentially at their
    // initial values, so it must never win against 0.001.
    let base = AeConfig {
        n_signals: 3,
        window: 10,
        encoder_widths: vec![30, 15],
        decoder_widths: vec![15, 30],
        ..AeConfig::default()
    };
    let space = SearchSpace {
        learning_rates: vec![1e-9, 0.001],
        ..SearchSpace::singleton(&base)
    };
    let windows = sine_windows(3, 10, 80);
    let r = random_search(&base, &space, 6, 5, &windows, 21).unwrap();
    let tried: std::collections::BTreeSet<u64> = r
        .trials
        .iter()
        .map(|t| t.config.learning_rate.to_bits())
        .collect();
    assert_eq!(tried.len(), 2, "both candidates sampled");
    let argmin = r
        .trials
        .iter()
        .min_by(|a, b| a.best_val_loss.total_cmp(&b.best_val_loss))
        .unwrap();
    assert_eq!(r.best.learning_rate, argmin.config.learning_rate);
    assert_eq!(r.best.learning_rate, 0.001);
    let r2 = random_search(&base, &space, 6, 5, &windows, 21).unwrap();
    assert_eq!(r, r2);
}
