use phonotactic_core::phonolm::{LmWord, ModelConfig, PhonoLm, Vocabulary, Weighting};
use phonotactic_core::{LanguageProfile, PhoneTable};

fn words() -> Vec<LmWord> {
    ["klaver", "ʔɔrdə", "stal", "rɪps", "spa", "ɛik"]
        .iter()
        .map(|t| LmWord::from_transcription(t, PhoneTable::builtin(), LanguageProfile::Dutch, true).unwrap())
        .collect()
}

#[test]
fn phone_loss_ignores_the_weighting() {
    let ws = words();
    let base = ModelConfig::<f64> {
        embedding_dim: 8,
        hidden_dim: 8,
        seed: 9,
        ..Default::default()
    };
    let mut model = PhonoLm::init(Vocabulary::from_words(&ws).unwrap(), &base).unwrap();
    let n = model.n_params();
    model.params_mut()[n - 2] = 0.8;
    model.params_mut()[n - 1] = -1.2;

    let single = base.clone();
    let static_zero = ModelConfig {
        multitask: true,
        weighting: Weighting::Static,
        lambda_syl: 0.0,
        ..base.clone()
    };
    let uncertainty = ModelConfig {
        multitask: true,
        ..base
    };
    let phon = model.losses(&ws).unwrap().phon;
    assert_eq!(model.total_loss(&ws, &single).unwrap(), phon);
    assert_eq!(model.total_loss(&ws, &static_zero).unwrap(), phon);
    // uncertainty weighting changes the objective but not the phone loss
    assert_ne!(model.total_loss(&ws, &uncertainty).unwrap(), phon);
    let bits = |w: &[LmWord]| -> f64 {
        let nats: f64 = w.iter().map(|x| -model.log_prob(x).unwrap()).sum();
        let n: usize = w.iter().map(|x| x.tokens.len() + 1).sum();
        nats / n as f64 / std::f64::consts::LN_2
    };
    assert!((bits(&ws) - phon / std::f64::consts::LN_2).abs() < 1e-12);
}
