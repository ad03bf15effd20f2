mod common;

use std::time::Duration;

use icl_gap::client::{CompletionModel, CompletionParams, HttpCompletion, ModelEndpoint};
use icl_gap::corpus::DatasetId;
use icl_gap::prompt::PromptTemplate;
use icl_gap::Error;

fn client(url: String, retries: u32) -> HttpCompletion {
    HttpCompletion::new(url, Some("secret".into()), Duration::from_secs(5), retries, Duration::from_millis(1))
}

#[test]
fn returns_first_choice_and_sends_wire_format() {
    let (url, seen) = common::stub_server(vec![(200, common::choice("WALK WALK"))]);
    let params = CompletionParams::for_dataset(DatasetId::Scan);
    let text = client(url, 0).complete("Command: walk twice\nActions: ", &params).unwrap();
    assert_eq!(text, "WALK WALK");

    let seen = seen.lock().unwrap();
    assert_eq!(seen.len(), 1);
    let body: serde_json::Value = serde_json::from_str(&seen[0].body).unwrap();
    assert_eq!(body["prompt"], "Command: walk twice\nActions: ");
    assert_eq!(body["max_tokens"], 700);
    assert_eq!(body["temperature"], 0.0);
    assert_eq!(body["stop"], serde_json::json!(["\n\n"]));
    assert_eq!(seen[0].headers["authorization"], "Bearer secret");
}

#[test]
fn retries_transient_failures() {
    let (url, seen) = common::stub_server(vec![
        (500, "oops".into()),
        (200, "{\"choices\": []}".into()),
        (200, common::choice("JUMP")),
    ]);
    let params = CompletionParams::for_dataset(DatasetId::Scan);
    assert_eq!(client(url, 3).complete("p", &params).unwrap(), "JUMP");
    assert_eq!(seen.lock().unwrap().len(), 3);
}

#[test]
fn gives_up_after_bounded_retries() {
    let (url, seen) = common::stub_server(vec![(503, "busy".into())]);
    let params = CompletionParams::for_dataset(DatasetId::Cfq);
    let err = client(url, 2).complete("p", &params).unwrap_err();
    assert!(matches!(err, Error::Client { attempts: 3, .. }), "{err}");
    assert_eq!(seen.lock().unwrap().len(), 3);
}

#[test]
fn malformed_body_is_an_error() {
    let (url, _) = common::stub_server(vec![(200, "{\"choices\": [{\"txt\": 1}]}".into())]);
    let params = CompletionParams::for_dataset(DatasetId::Cfq);
    assert!(client(url, 0).complete("p", &params).is_err());
}

#[test]
fn token_comes_from_named_environment_variable() {
    let (url, seen) = common::stub_server(vec![(200, common::choice("ok"))]);
    std::env::set_var("ICL_GAP_TEST_TOKEN", "tok-123");
    let ep = ModelEndpoint::HttpCompletion {
        url,
        api_key_env: Some("ICL_GAP_TEST_TOKEN".into()),
        timeout_secs: 5,
        max_retries: 0,
        backoff_ms: 1,
    };
    let model = ep.connect(&PromptTemplate::scan(), &[]).unwrap();
    model.complete("p", &CompletionParams::for_dataset(DatasetId::Scan)).unwrap();
    assert_eq!(seen.lock().unwrap()[0].headers["authorization"], "Bearer tok-123");
}
