mod common;

use common::*;
use seqprobe::checkpoint::ModelBundle;
use seqprobe::probe::{Dialog, DialogConfig, ItemLikelihood};
use seqprobe::training::text::tokenize;
use seqprobe_service::{ChatService, ServiceConfig, SessionOverrides, TranscriptStore};

#[test]
fn recorded_transcript_replays_byte_for_byte() {
    let transcript = fixture_transcript();
    assert_eq!(transcript.len(), 6);
    let svc = fixture_service();
    let id = svc.create_session(&SessionOverrides::default()).unwrap().id;
    for (turn, (text, recorded)) in transcript.iter().enumerate() {
        let reply = svc.handle_message(&id, text).unwrap();
        assert_eq!(&serde_json::to_string(&reply).unwrap(), recorded, "turn {turn}");
    }
    let turns = svc.transcript(&id).unwrap();
    assert_eq!(turns.len(), 12);
}

#[tokio::test]
async fn recorded_transcript_replays_over_http() {
    let app = app(fixture_service());
    let (_, _, created) = call(&app, "POST", "/sessions", "").await;
    let id = json(&created)["id"].as_str().unwrap().to_string();
    for (text, recorded) in fixture_transcript() {
        let body = serde_json::json!({ "text": text }).to_string();
        let (status, _, bytes) = call(&app, "POST", &format!("/sessions/{id}/messages"), &body).await;
        assert_eq!(status, 200);
        assert_eq!(String::from_utf8(bytes).unwrap(), recorded);
    }
}

#[test]
fn posterior_matches_a_directly_driven_dialog() {
    let catalog = fixture_catalog();
    let model: ModelBundle = fixture_model();
    let svc = fixture_service();
    let id = svc.create_session(&SessionOverrides::default()).unwrap().id;
    let mut direct = Dialog::new(&catalog, DialogConfig::default()).unwrap();
    let likelihood: &dyn ItemLikelihood = &model;
    for (text, _) in fixture_transcript() {
        svc.handle_message(&id, &text).unwrap();
        let tokens = tokenize(&text);
        if !tokens.is_empty() {
            direct.step(&catalog, &tokens, Some(likelihood)).unwrap();
        }
        let served = svc.dialog(&id).unwrap();
        let bits = |d: &Dialog| d.state.posterior.iter().map(|p| p.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&served), bits(&direct));
        assert_eq!(served, direct);

        let snap = svc.get_posterior(&id).unwrap();
        let total: f64 = snap.items.iter().map(|c| c.probability).sum();
        assert!((total - 1.0).abs() < 1e-9);
        assert!(snap.items.windows(2).all(|w| w[0].probability >= w[1].probability));
    }
}

#[test]
fn restarted_service_restores_sessions_from_the_store() {
    let dir = tempfile::tempdir().unwrap();
    let transcript = fixture_transcript();
    let store = TranscriptStore::open(dir.path()).unwrap();
    let first = fixture_service().with_store(store.clone()).unwrap();
    let id = first.create_session(&SessionOverrides::default()).unwrap().id;
    for (text, _) in &transcript[..4] {
        first.handle_message(&id, text).unwrap();
    }
    let before = first.get_posterior(&id).unwrap();
    drop(first);

    let second = fixture_service().with_store(store).unwrap();
    assert_eq!(second.get_posterior(&id).unwrap(), before);
    assert_eq!(second.transcript(&id).unwrap().len(), 8);
    for (text, recorded) in &transcript[4..] {
        let reply = second.handle_message(&id, text).unwrap();
        assert_eq!(&serde_json::to_string(&reply).unwrap(), recorded);
    }
}

#[test]
fn tampered_store_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let store = TranscriptStore::open(dir.path()).unwrap();
    let svc = fixture_service().with_store(store.clone()).unwrap();
    let id = svc.create_session(&SessionOverrides::default()).unwrap().id;
    svc.handle_message(&id, "red wool scarf").unwrap();
    let path = dir.path().join(format!("{id}.jsonl"));
    let text = std::fs::read_to_string(&path).unwrap().replace("What size", "What shape");
    std::fs::write(&path, text).unwrap();
    let err = fixture_service().with_store(store).err().unwrap();
    assert!(err.to_string().contains("diverged"), "{err}");
}

#[test]
fn sessions_do_not_interfere_under_concurrency() {
    let svc = std::sync::Arc::new(ChatService::new(
        fixture_catalog(),
        fixture_model(),
        None,
        ServiceConfig::default(),
    ));
    let transcript = fixture_transcript();
    let handles: Vec<_> = (0..4)
        .map(|_| {
            let svc = svc.clone();
            let transcript = transcript.clone();
            std::thread::spawn(move || {
                let id = svc.create_session(&SessionOverrides::default()).unwrap().id;
                for (text, recorded) in &transcript {
                    let reply = svc.handle_message(&id, text).unwrap();
                    assert_eq!(&serde_json::to_string(&reply).unwrap(), recorded);
                }
            })
        })
        .collect();
    for h in handles {
        h.join().unwrap();
    }
    assert_eq!(svc.session_count(), 4);
}
