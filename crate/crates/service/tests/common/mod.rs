#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use tower::ServiceExt;

use seqprobe::checkpoint::ModelBundle;
use seqprobe::probe::Catalog;
use seqprobe::seq2seq::{Attention, ModelConfig, ModelParams};
use seqprobe::training::Vocab;
use seqprobe_service::{router, ChatService, ServiceConfig};

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub fn fixture_catalog() -> Catalog {
    Catalog::load(&fixtures().join("catalog.jsonl")).unwrap()
}

pub fn fixture_model() -> ModelBundle {
    ModelBundle::load(&fixtures().join("model.json")).unwrap()
}

/// `(user text, recorded reply JSON)` per turn.
pub fn fixture_transcript() -> Vec<(String, String)> {
    std::fs::read_to_string(fixtures().join("transcript.jsonl"))
        .unwrap()
        .lines()
        .map(|l| {
            let v: serde_json::Value = serde_json::from_str(l).unwrap();
            (v["user"].as_str().unwrap().to_string(), v["reply"].as_str().unwrap().to_string())
        })
        .collect()
}

/// All-zero model over the catalog's title words: every title of equal
/// length gets the same likelihood for any input.
pub fn zero_model(catalog: &Catalog) -> ModelBundle {
    let mut words: Vec<String> = catalog.items().iter().flat_map(|i| i.title.clone()).collect();
    words.sort();
    words.dedup();
    let vocab = Vocab::from_words(words);
    let cfg = ModelConfig {
        src_vocab_size: vocab.len(),
        tgt_vocab_size: vocab.len(),
        d_emb: 2,
        d_h: 2,
        enc_layers: 1,
        dec_layers: 1,
        attention: Attention::Dot,
        max_decode_len: 4,
    };
    ModelBundle {
        src_vocab: vocab.clone(),
        tgt_vocab: vocab,
        params: ModelParams::zeros(&cfg).unwrap(),
    }
}

pub fn fixture_service() -> ChatService {
    ChatService::new(fixture_catalog(), fixture_model(), None, ServiceConfig::default())
}

pub fn app(svc: ChatService) -> Router {
    router(Arc::new(svc), None)
}

pub async fn call(app: &Router, method: &str, uri: &str, body: &str) -> (StatusCode, axum::http::HeaderMap, Vec<u8>) {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .header("origin", "http://localhost:5173")
        .body(Body::from(body.to_string()))
        .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let headers = resp.headers().clone();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes().to_vec();
    (status, headers, bytes)
}

pub fn json(bytes: &[u8]) -> serde_json::Value {
    serde_json::from_slice(bytes).unwrap()
}
