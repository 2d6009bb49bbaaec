//! Train on the copy task and report loss per epoch plus held-out exact match.
//!
//! cargo run --release -p seqprobe --example copy_pilot -- [attention] [d_emb] [d_h] [epochs] [seed]

use std::time::Instant;

use seqprobe::seq2seq::Attention;
use seqprobe::synthetic::copy_task;
use seqprobe::training::{TrainConfig, Trainer};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let arg = |i: usize, default: &str| args.get(i).cloned().unwrap_or_else(|| default.to_string());
    let attention: Attention = arg(0, "general").parse().expect("attention");
    let d_emb: usize = arg(1, "16").parse().unwrap();
    let d_h: usize = arg(2, "32").parse().unwrap();
    let epochs: usize = arg(3, "30").parse().unwrap();
    let seed: u64 = arg(4, "1").parse().unwrap();

    let train = copy_task(2000, 17, 3, 8, seed);
    let held_out = copy_task(200, 17, 3, 8, seed + 1000);
    let config = TrainConfig {
        d_emb,
        d_h,
        attention,
        epochs,
        seed,
        max_decode_len: 10,
        ..TrainConfig::default()
    };
    let mut trainer = Trainer::new(&train, config).expect("trainer");
    let start = Instant::now();
    trainer
        .run(None, |e| {
            println!("epoch {:2}  loss {:.3e}  ({:.0}s)", e.epoch, e.mean_token_loss, start.elapsed().as_secs_f64());
        })
        .expect("training");
    let bundle = trainer.bundle();
    let exact = held_out
        .pairs
        .iter()
        .filter(|(s, t)| bundle.rewrite(s).map(|(out, _)| &out == t).unwrap_or(false))
        .count();
    println!("held-out exact match {exact}/{}", held_out.len());
}
