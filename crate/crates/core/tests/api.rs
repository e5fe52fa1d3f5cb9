use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use cas_core::fixtures;
use cas_core::http::{router, AppState};
use cas_core::store::WorkspaceStore;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

struct Api {
    app: Router,
    _dir: tempfile::TempDir,
}

impl Api {
    fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        let app = router(AppState::new(WorkspaceStore::open(dir.path()).unwrap()));
        Api { app, _dir: dir }
    }

    async fn call(&self, method: &str, uri: &str, body: Option<String>) -> (StatusCode, String) {
        let req = Request::builder()
            .method(method)
            .uri(uri)
            .header("content-type", "application/json")
            .body(body.map(Body::from).unwrap_or_else(Body::empty))
            .unwrap();
        let resp = self.app.clone().oneshot(req).await.unwrap();
        let status = resp.status();
        let bytes = resp.into_body().collect().await.unwrap().to_bytes();
        (status, String::from_utf8(bytes.to_vec()).unwrap())
    }

    async fn json(&self, method: &str, uri: &str, body: Option<String>) -> (StatusCode, Value) {
        let (s, text) = self.call(method, uri, body).await;
        (s, serde_json::from_str(&text).unwrap_or(Value::String(text)))
    }

    async fn store_case(&self, case: &str) -> String {
        let (s, v) = self
            .json("POST", "/assessments", Some(fixtures::text(&format!("{case}.json")).unwrap().into()))
            .await;
        assert_eq!(s, StatusCode::OK, "{v}");
        v["id"].as_str().unwrap().to_string()
    }
}

fn scenario_with(case: &str, tier: &str, baseline: Value) -> String {
    let mut v: Value = serde_json::from_str(fixtures::text(&format!("{case}_{tier}.json")).unwrap()).unwrap();
    v["baseline"] = baseline;
    v.to_string()
}

#[tokio::test]
async fn create_and_score_case1() {
    let api = Api::new();
    let (s, v) = api
        .json("POST", "/assessments", Some(fixtures::text("case1.json").unwrap().into()))
        .await;
    assert_eq!(s, StatusCode::OK);
    let total = v["assessment"]["cas"]["total"].as_f64().unwrap();
    assert!((total - 0.551).abs() < 1e-3);
    let id = v["id"].as_str().unwrap();

    let (s, listed) = api.json("GET", "/assessments", None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(listed, json!([id]));
    let (s, rescored) = api.json("POST", &format!("/assessments/{id}/score"), None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(rescored["cas"]["total"].as_f64().unwrap().to_bits(), total.to_bits());
}

#[tokio::test]
async fn unknown_assessment_is_404() {
    let api = Api::new();
    let (s, v) = api.json("GET", "/assessments/deadbeef", None).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    assert_eq!(v["code"], "not_found");
}

#[tokio::test]
async fn invalid_sheets_are_400_with_a_field() {
    let api = Api::new();
    let mut v: Value = serde_json::from_str(fixtures::text("case1.json").unwrap()).unwrap();
    v["traceability"]["levels"] = json!([2, 1, 2, 1, 9]);
    let (s, body) = api.json("POST", "/assessments", Some(v.to_string())).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    assert_eq!(body["code"], "validation");
    assert!(body["field"].as_str().unwrap().contains("traceability"), "{body}");

    let (s, body) = api.json("POST", "/assessments", Some("{not json".into())).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    assert_eq!(body["code"], "malformed_json");
}

#[tokio::test]
async fn newer_schema_is_409() {
    let api = Api::new();
    let mut v: Value = serde_json::from_str(fixtures::text("case1.json").unwrap()).unwrap();
    v["schema_version"] = json!("99");
    let (s, body) = api.json("POST", "/assessments", Some(v.to_string())).await;
    assert_eq!(s, StatusCode::CONFLICT);
    assert_eq!(body["code"], "schema_version");
}

#[tokio::test]
async fn scenario_by_stored_id_and_inline_sheet() {
    let api = Api::new();
    let id = api.store_case("case1").await;
    let (s, v) = api
        .json("POST", "/scenarios/evaluate", Some(scenario_with("case1", "hf", json!({ "id": id }))))
        .await;
    assert_eq!(s, StatusCode::OK, "{v}");
    assert!((v["result"]["new_total"].as_f64().unwrap() - 0.622).abs() < 1e-3);

    let sheet: Value = serde_json::from_str(fixtures::text("case2.json").unwrap()).unwrap();
    let (s, v) = api
        .json("POST", "/scenarios/evaluate", Some(scenario_with("case2", "mf", json!({ "sheet": sheet }))))
        .await;
    assert_eq!(s, StatusCode::OK, "{v}");
    assert!((v["result"]["new_total"].as_f64().unwrap() - 0.960).abs() < 1e-3);
    assert_eq!(v["notes"][0]["subject"], "MF");
}

#[tokio::test]
async fn scenario_baseline_errors_name_the_field() {
    let api = Api::new();
    let missing = {
        let mut v: Value = serde_json::from_str(fixtures::text("case1_hf.json").unwrap()).unwrap();
        v.as_object_mut().unwrap().remove("baseline");
        v.to_string()
    };
    for body in [
        missing,
        scenario_with("case1", "hf", json!({ "id": "nope" })),
        scenario_with("case1", "hf", json!({ "path": "/etc/passwd" })),
    ] {
        let (s, v) = api.json("POST", "/scenarios/evaluate", Some(body)).await;
        assert_eq!(s, StatusCode::BAD_REQUEST, "{v}");
        assert_eq!(v["field"], "baseline", "{v}");
    }
}

#[tokio::test]
async fn rank_orders_by_delta() {
    let api = Api::new();
    let id = api.store_case("case2").await;
    let (s, v) = api
        .json("POST", "/scenarios/rank", Some(scenario_with("case2", "mf", json!({ "id": id }))))
        .await;
    assert_eq!(s, StatusCode::OK, "{v}");
    let deltas: Vec<f64> = v["candidates"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["delta"].as_f64().unwrap())
        .collect();
    assert!(deltas.windows(2).all(|w| w[0] >= w[1] - 1e-12), "{deltas:?}");
    assert_eq!(v["candidates"][0]["modification"]["property"], "explainability");
}

#[tokio::test]
async fn taxonomy_routes() {
    let api = Api::new();
    let (s, v) = api.json("GET", "/taxonomy", None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v["criteria"].as_array().unwrap().len(), 21);
    let (s, v) = api.json("GET", "/taxonomy/high/low", None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v["flags"], json!(["regulatory_warning"]));
    let (s, _) = api.json("GET", "/taxonomy/extreme/low", None).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn ledger_evaluation_with_and_without_weights() {
    let api = Api::new();
    let body = fixtures::text("ledger_loans.json").unwrap().to_string();
    let (s, v) = api.json("POST", "/ledgers/evaluate", Some(body.clone())).await;
    assert_eq!(s, StatusCode::OK, "{v}");
    assert!((v["aggregate"]["value"].as_f64().unwrap() - 0.778).abs() < 1e-3);
    let (s, v) = api
        .json("POST", "/ledgers/evaluate?alpha=0&beta=0&gamma=1", Some(body.clone()))
        .await;
    assert_eq!(s, StatusCode::OK);
    assert!((v["aggregate"]["value"].as_f64().unwrap() - 1.0 / 3.0).abs() < 1e-12);
    let (s, v) = api.json("POST", "/ledgers/evaluate?alpha=1", Some(body)).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    assert_eq!(v["field"], "weights");
}

#[tokio::test]
async fn report_formats() {
    let api = Api::new();
    let id = api.store_case("case3").await;
    let (s, md) = api.call("GET", &format!("/reports/{id}"), None).await;
    assert_eq!(s, StatusCode::OK);
    assert!(md.contains("**0.376**"), "{md}");
    let (s, v) = api.json("GET", &format!("/reports/{id}?format=json"), None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v["cas_table"]["total"], json!(0.376));
    let (s, csv) = api.call("GET", &format!("/reports/{id}?format=csv"), None).await;
    assert_eq!(s, StatusCode::OK);
    assert!(csv.starts_with("column,property"));
    let (s, v) = api.json("GET", &format!("/reports/{id}?format=pdf"), None).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    assert_eq!(v["code"], "unsupported_format");
}

#[tokio::test]
async fn static_reference_routes() {
    let api = Api::new();
    for uri in ["/healthz", "/rubrics", "/weights"] {
        let (s, _) = api.call("GET", uri, None).await;
        assert_eq!(s, StatusCode::OK, "{uri}");
    }
    let id = api.store_case("case1").await;
    let (s, v) = api.json("GET", &format!("/assessments/{id}/radar"), None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v[0]["axes"].as_array().unwrap().len(), 8);
}
