use std::path::{Path, PathBuf};
use std::sync::Arc;

use axum::body::Body;
use axum::http::{header, Method, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use pibase_core::deduction::{replay_proof, space_assumptions, ProofStep};
use pibase_core::id::EntityId;
use pibase_service::{router, AppState};
use serde_json::{json, Value};
use tower::ServiceExt;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/fixtures")
        .join(name)
}

fn state(name: &str) -> Arc<AppState> {
    Arc::new(AppState::load(&fixture(name)).unwrap())
}

fn app(name: &str) -> Router {
    router(state(name), "*").unwrap()
}

async fn send(app: &Router, request: Request<Body>) -> (StatusCode, Vec<u8>) {
    let response = app.clone().oneshot(request).await.unwrap();
    let status = response.status();
    let bytes = response
        .into_body()
        .collect()
        .await
        .unwrap()
        .to_bytes()
        .to_vec();
    (status, bytes)
}

async fn get(app: &Router, uri: &str) -> (StatusCode, Value) {
    let (status, bytes) = send(app, Request::get(uri).body(Body::empty()).unwrap()).await;
    (status, serde_json::from_slice(&bytes).unwrap())
}

async fn post(app: &Router, uri: &str, body: Value) -> (StatusCode, Value) {
    let request = Request::builder()
        .method(Method::POST)
        .uri(uri)
        .header(header::CONTENT_TYPE, "application/json")
        .body(Body::from(body.to_string()))
        .unwrap();
    let (status, bytes) = send(app, request).await;
    (status, serde_json::from_slice(&bytes).unwrap())
}

fn theorems(proof: &Value) -> Vec<&str> {
    proof
        .as_array()
        .unwrap()
        .iter()
        .map(|s| s["theorem"].as_str().unwrap())
        .collect()
}

#[tokio::test]
async fn derived_trait_proof() {
    let app = app("listings");
    let (status, body) = get(&app, "/spaces/S000001/traits/P000001/proof").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["value"], json!(true));
    assert_eq!(body["provenance"]["kind"], "derived");
    assert_eq!(
        theorems(&body["provenance"]["proof"]),
        ["T000042", "T000119"]
    );
}

#[tokio::test]
async fn asserted_trait_proof_carries_refs() {
    let app = app("listings");
    let (status, body) = get(&app, "/spaces/S000001/traits/P000052/proof").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["provenance"]["kind"], "asserted");
    assert_eq!(body["provenance"]["refs"][0]["scheme"], "doi");
}

#[tokio::test]
async fn undetermined_trait_has_no_proof() {
    let app = app("counterexamples-mini");
    let (status, body) = get(&app, "/spaces/S000300/traits/P000001/proof").await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(body["error"]["code"], "undetermined");
}

#[tokio::test]
async fn space_traits_separate_asserted_and_derived() {
    let app = app("listings");
    let (status, body) = get(&app, "/spaces/S000001/traits").await;
    assert_eq!(status, StatusCode::OK);
    let kinds: Vec<(&str, &str)> = body["traits"]
        .as_array()
        .unwrap()
        .iter()
        .map(|t| {
            (
                t["property"].as_str().unwrap(),
                t["provenance"]["kind"].as_str().unwrap(),
            )
        })
        .collect();
    assert_eq!(
        kinds,
        [
            ("P000001", "derived"),
            ("P000002", "derived"),
            ("P000052", "asserted")
        ]
    );
    assert_eq!(body["undetermined"], json!([]));
}

#[tokio::test]
async fn impossible_search() {
    let app = app("listings");
    let (status, body) = get(&app, "/search?q=Discrete+%2B+~T1").await;
    assert_eq!(status, StatusCode::OK);
    assert!(body["impossibility"].is_object());

    let (status, body) = get(&app, "/search?q=Discrete+%2B+~%24T_0%24").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["matches"], json!([]));
    let contradiction = &body["impossibility"]["contradiction"];
    let mut used = theorems(&contradiction["derived"]["proof"]);
    used.extend(theorems(&contradiction["existing"]["proof"]));
    used.sort();
    used.dedup();
    assert_eq!(used, ["T000042", "T000119"]);
}

#[tokio::test]
async fn search_errors_are_structured() {
    let app = app("listings");
    let (status, body) = get(&app, "/search?q=Disrete").await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(body["error"]["code"], "unresolved_name");
    assert_eq!(
        body["error"]["location"],
        json!({"parameter": "q", "offset": 0, "term": "Disrete"})
    );
    assert_eq!(body["error"]["suggestions"], json!(["Discrete"]));

    let (status, body) = get(&app, "/search?q=Discrete+%2B+").await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(body["error"]["code"], "empty_term");

    let (status, body) = get(&app, "/search?query=Discrete").await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(body["error"]["code"], "invalid_parameters");
}

#[tokio::test]
async fn search_reports_unknown_spaces() {
    let app = app("counterexamples-mini");
    let (status, body) = get(&app, "/search?q=Semi-Hausdorff").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(
        body["verdicts"]["S000300"],
        json!({"verdict": "unknown", "undetermined": ["P000169"]})
    );
}

#[tokio::test]
async fn check_not_derivable() {
    let app = app("listings");
    let (status, body) = post(
        &app,
        "/theorems/check",
        json!({"if": {"P000001": true}, "then": {"P000052": true}}),
    )
    .await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["verdict"], "not_derivable");
    assert_eq!(body["undecided"], json!([]));
    assert!(body["note"].is_string());
}

#[tokio::test]
async fn check_redundant_by_name() {
    let app = app("listings");
    let (status, body) = post(
        &app,
        "/theorems/check",
        json!({"if": {"Discrete": true}, "then": {"Kolmogorov": true}}),
    )
    .await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["verdict"], "redundant");
    assert_eq!(theorems(&body["proof"]), ["T000042", "T000119"]);
    assert_eq!(
        body["candidate"]["premises"],
        json!([{"property": "P000052", "value": true}])
    );
}

#[tokio::test]
async fn check_refuted_by_a_space() {
    let app = app("counterexamples-mini");
    let (status, body) = post(
        &app,
        "/theorems/check",
        json!({"if": {"US": true}, "then": {"KC": true}}),
    )
    .await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["verdict"], "refuted");
    let spaces: Vec<&str> = body["counterexamples"]
        .as_array()
        .unwrap()
        .iter()
        .map(|w| w["space"].as_str().unwrap())
        .collect();
    assert!(spaces.contains(&"S000165"));
}

#[tokio::test]
async fn check_input_errors() {
    let app = app("listings");
    let (status, body) = post(
        &app,
        "/theorems/check",
        json!({"if": {"Discrte": true}, "then": {"P000001": true}}),
    )
    .await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(body["error"]["code"], "unresolved_name");
    assert_eq!(body["error"]["location"], json!({"field": "if.Discrte"}));

    let (status, body) = post(
        &app,
        "/theorems/check",
        json!({"if": {}, "then": {"P000001": true}}),
    )
    .await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(body["error"]["code"], "no_premises");

    let (status, body) = post(
        &app,
        "/theorems/check",
        json!({"if": {"P000052": true}, "then": {}}),
    )
    .await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(body["error"]["code"], "conclusion_count");

    let (status, body) = post(&app, "/theorems/check", json!({"if": {"P000052": "yes"}})).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(body["error"]["code"], "invalid_body");
}

#[tokio::test]
async fn unknown_and_malformed_ids() {
    let app = app("listings");
    let (status, body) = get(&app, "/properties/P999999").await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(body["error"]["code"], "not_found");

    let (status, body) = get(&app, "/properties/S000001").await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(body["error"]["code"], "invalid_id");
    assert_eq!(body["error"]["location"], json!({"parameter": "id"}));

    let (status, _) = get(&app, "/theorems/T000007").await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let (status, _) = get(&app, "/nowhere").await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn entity_endpoints() {
    let app = app("listings");
    let (_, body) = get(&app, "/properties/P000001").await;
    assert_eq!(body["name"], "$T_0$");
    assert_eq!(body["aliases"], json!(["Kolmogorov", "T0"]));
    let (_, body) = get(&app, "/spaces/S000001").await;
    assert_eq!(body["name"], "Discrete topology on a two-point set");
    let (_, body) = get(&app, "/theorems/T000119").await;
    assert_eq!(
        body["premises"],
        json!([{"property": "P000002", "value": true}])
    );
    let (_, body) = get(&app, "/").await;
    assert_eq!(
        body,
        json!({"properties": 3, "spaces": 1, "theorems": 2, "traits": 1})
    );
}

#[tokio::test]
async fn pagination() {
    let app = app("counterexamples-mini");
    let (_, all) = get(&app, "/properties").await;
    assert_eq!(all["total"], 14);
    assert_eq!(all["items"].as_array().unwrap().len(), 14);
    let (_, page) = get(&app, "/properties?offset=2&limit=3").await;
    assert_eq!(page["items"].as_array().unwrap().len(), 3);
    assert_eq!(page["items"][0], all["items"][2]);
    let (_, past) = get(&app, "/spaces?offset=100").await;
    assert_eq!(past["items"], json!([]));
    let (status, _) = get(&app, "/theorems?limit=-1").await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

const NOT_T0: &str = "---\nspace: S000001\nproperty: P000001\nvalue: false\n---\n";

#[tokio::test]
async fn validate_rejects_contradicting_submission() {
    let app = app("listings");
    let doc = json!({"path": "spaces/S000001/properties/P000001.md", "content": NOT_T0});
    let (status, body) = post(&app, "/validate", json!({"documents": [doc]})).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(body["valid"], false);
    let c = &body["contradictions"][0];
    assert_eq!(c["space"], "S000001");
    assert_eq!(
        theorems(&c["contradiction"]["derived"]["proof"]),
        ["T000042", "T000119"]
    );

    // The loaded bundle is unchanged.
    let (_, proof) = get(&app, "/spaces/S000001/traits/P000001/proof").await;
    assert_eq!(proof["value"], true);
}

#[tokio::test]
async fn validate_reports_load_errors() {
    let app = app("listings");
    let doc = json!({"path": "theorems/T000200.md", "content": "---\nuid: T000200\nif:\n  P000777: true\nthen:\n  P000001: true\n---\n"});
    let (status, body) = post(&app, "/validate", json!({"documents": [doc]})).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(body["errors"][0]["code"], "dangling_reference");
    assert_eq!(body["errors"][0]["path"], "theorems/T000200.md");
}

#[tokio::test]
async fn validate_accepts_a_clean_contribution() {
    let app = app("listings");
    let doc = json!({"path": "spaces/S000001/properties/P000002.md", "content": "---\nspace: S000001\nproperty: P000002\nvalue: true\n---\n"});
    let (status, body) = post(&app, "/validate", json!({"documents": [doc]})).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(
        body,
        json!({"valid": true, "errors": [], "contradictions": []})
    );

    let bad = json!({"path": "../escape.md", "content": ""});
    let (status, body) = post(&app, "/validate", json!({"documents": [bad]})).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(body["error"]["code"], "invalid_document_path");
}

#[tokio::test]
async fn responses_are_byte_identical() {
    for uri in [
        "/spaces/S000001/traits",
        "/search?q=Hausdorff",
        "/theorems",
        "/spaces/S000165/traits",
    ] {
        let a = send(
            &app("counterexamples-mini"),
            Request::get(uri).body(Body::empty()).unwrap(),
        )
        .await;
        let b = send(
            &app("counterexamples-mini"),
            Request::get(uri).body(Body::empty()).unwrap(),
        )
        .await;
        assert_eq!(a, b, "{uri}");
    }
}

#[tokio::test]
async fn every_served_proof_replays() {
    let state = state("counterexamples-mini");
    let app = router(state.clone(), "*").unwrap();
    let (_, spaces) = get(&app, "/spaces").await;
    let mut replayed = 0;
    for space in spaces["items"].as_array().unwrap() {
        let uid = space["uid"].as_str().unwrap();
        let id: EntityId = uid.parse().unwrap();
        let (_, traits) = get(&app, &format!("/spaces/{uid}/traits")).await;
        for t in traits["traits"].as_array().unwrap() {
            if t["provenance"]["kind"] != "derived" {
                continue;
            }
            let proof: Vec<ProofStep> =
                serde_json::from_value(t["provenance"]["proof"].clone()).unwrap();
            let assumptions = space_assumptions(&state.db.bundle, id);
            let derived = replay_proof(&state.db.engine, &assumptions, &proof).unwrap();
            let property: EntityId = t["property"].as_str().unwrap().parse().unwrap();
            assert_eq!(derived.value(property), t["value"].as_bool());
            replayed += 1;
        }
    }
    assert!(replayed > 20);
}

#[tokio::test]
async fn cors_headers() {
    let app = app("listings");
    let request = Request::get("/properties")
        .header(header::ORIGIN, "http://localhost:5173")
        .body(Body::empty())
        .unwrap();
    let response = app.oneshot(request).await.unwrap();
    assert_eq!(response.headers()[header::ACCESS_CONTROL_ALLOW_ORIGIN], "*");

    let only = router(state("listings"), "http://localhost:5173").unwrap();
    let request = Request::get("/")
        .header(header::ORIGIN, "http://localhost:5173")
        .body(Body::empty())
        .unwrap();
    let response = only.oneshot(request).await.unwrap();
    assert_eq!(
        response.headers()[header::ACCESS_CONTROL_ALLOW_ORIGIN],
        "http://localhost:5173"
    );
}

#[test]
fn inconsistent_bundles_are_refused_at_startup() {
    let mut docs = pibase_core::corpus::read_documents(&fixture("listings")).unwrap();
    docs.push(pibase_core::corpus::SourceDocument::new(
        "spaces/S000001/properties/P000001.md",
        NOT_T0,
    ));
    let report = AppState::from_documents(docs).unwrap_err();
    assert!(report.errors.is_empty());
    assert_eq!(report.contradictions.len(), 1);
    assert!(AppState::load(&fixture("missing")).is_err());
}
