//! Regenerate tests/fixtures/{model.json,transcript.jsonl}.
//!
//! cargo run --release -p seqprobe-service --example record_fixture

use std::io::Write;
use std::path::Path;

use seqprobe::probe::Catalog;
use seqprobe::seq2seq::Attention;
use seqprobe::training::{train, PairCorpus, TrainConfig};
use seqprobe_service::{ChatService, ServiceConfig, SessionOverrides};

const TURNS: [&str; 6] = ["", "red wool scarf", "a short one", "Blue", "thanks", "gloves"];

fn main() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    let catalog = Catalog::load(&dir.join("catalog.jsonl")).expect("catalog");

    // title -> every one- and two-word in-order query
    let mut corpus = PairCorpus::new("fixture titles");
    for item in catalog.items() {
        let t = &item.title;
        for i in 0..t.len() {
            corpus.push(t.clone(), vec![t[i].clone()]).unwrap();
            for j in i + 1..t.len() {
                corpus.push(t.clone(), vec![t[i].clone(), t[j].clone()]).unwrap();
            }
        }
    }
    let config = TrainConfig {
        d_emb: 6,
        d_h: 8,
        attention: Attention::General,
        epochs: 20,
        seed: 7,
        max_decode_len: 4,
        ..TrainConfig::default()
    };
    let bundle = train(&corpus, config, None).expect("train").bundle;
    bundle.save(&dir.join("model.json")).expect("save model");

    let svc = ChatService::new(catalog, bundle, None, ServiceConfig::default());
    let id = svc.create_session(&SessionOverrides::default()).unwrap().id;
    let mut out = std::fs::File::create(dir.join("transcript.jsonl")).unwrap();
    for text in TURNS {
        let reply = svc.handle_message(&id, text).unwrap();
        let line = serde_json::json!({ "user": text, "reply": serde_json::to_string(&reply).unwrap() });
        writeln!(out, "{line}").unwrap();
        println!("> {text}\n< {}", serde_json::to_string(&reply).unwrap());
    }
}
