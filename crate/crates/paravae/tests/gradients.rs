//! Finite-difference verification of every differentiable path at toy
//! dimensions: the pair loss under each decoder variant, the latent-code
//! embeddings, the word position loss, and the reparameterized vMF/Gaussian
//! sampling paths.

mod common;

use common::{assert_grad_matches_fd, tiny_config, tiny_lc_config, tiny_model};
use paravae::model::{DecoderVariant, Model};
use paravae::objectives::{total_loss, total_loss_grad, LossWeights, WplConfig, WplPlacement};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-3;

fn pair_for(model: &Model) -> (paravae::model::TokenSequence, paravae::model::TokenSequence) {
    let x1 = model.sequence(vec![4, 5, 6, 7]).unwrap();
    let x2 = model.sequence(vec![7, 6, 9, 4, 5]).unwrap();
    (x1, x2)
}

fn check_config(
    label: &str,
    mut model: Model,
    weights: LossWeights,
    rng_seed: u64,
) {
    let (x1, x2) = pair_for(&model);
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let (_, grad) = total_loss_grad(&model, &x1, &x2, &weights, &mut rng).unwrap();
    assert_grad_matches_fd(
        &mut model,
        &grad,
        |m| {
            let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
            total_loss(m, &x1, &x2, &weights, &mut rng).unwrap().total
        },
        TOL,
        label,
    );
}

#[test]
fn elbo_only_loss_matches_fd() {
    // PRL and WPL off: the total is the sum of two weighted ELBOs, covering
    // both encoders, both reparameterized samplers, both KL terms, and the
    // decoder.
    let model = tiny_model(10, tiny_config(), 11);
    let weights = LossWeights { kl_y: 0.3, kl_z: 0.2, prl: 0.0, wpl: 0.0 };
    check_config("elbo", model, weights, 101);
}

#[test]
fn prl_crossed_loss_matches_fd() {
    let model = tiny_model(10, tiny_config(), 13);
    let weights = LossWeights { kl_y: 0.05, kl_z: 0.1, prl: 1.0, wpl: 0.0 };
    check_config("prl", model, weights, 103);
}

#[test]
fn wpl_both_emb_matches_fd() {
    let mut cfg = tiny_config();
    cfg.wpl = WplConfig { placement: WplPlacement::BothEmb, max_position: 8, head_depth: 3 };
    let model = tiny_model(10, cfg, 17);
    let weights = LossWeights { kl_y: 0.1, kl_z: 0.1, prl: 1.0, wpl: 0.7 };
    check_config("wpl-both-emb", model, weights, 107);
}

#[test]
fn wpl_dec_hidden_matches_fd() {
    let mut cfg = tiny_config();
    cfg.wpl = WplConfig { placement: WplPlacement::DecHidden, max_position: 8, head_depth: 2 };
    let model = tiny_model(10, cfg, 19);
    let weights = LossWeights { kl_y: 0.1, kl_z: 0.1, prl: 0.0, wpl: 1.0 };
    check_config("wpl-dec-hidden", model, weights, 109);
}

#[test]
fn latent_code_embeddings_match_fd() {
    let mut cfg = tiny_config();
    cfg.latent_code = Some(tiny_lc_config());
    let model = tiny_model(10, cfg, 23);
    let weights = LossWeights { kl_y: 0.1, kl_z: 0.2, prl: 1.0, wpl: 0.0 };
    check_config("latent-codes", model, weights, 113);
}

#[test]
fn decoder_variants_match_fd() {
    for (variant, seed) in [
        (DecoderVariant::Init, 29u64),
        (DecoderVariant::Concat, 31),
        (DecoderVariant::Swap, 37),
    ] {
        let mut cfg = tiny_config();
        cfg.decoder_variant = variant;
        let model = tiny_model(10, cfg, seed);
        let weights = LossWeights { kl_y: 0.2, kl_z: 0.1, prl: 0.0, wpl: 0.0 };
        check_config(&format!("variant-{variant:?}"), model, weights, seed + 1000);
    }
}
