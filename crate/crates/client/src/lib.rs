//! Async client for the simulator service.

use reqwest::StatusCode;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use ppac_core::controller::{ModeResult, PlaProgram, StoredMatrixLayout};
use ppac_core::difftest::{DifftestConfig, DifftestSummary};
use ppac_core::textfmt::IntMatrix;
use ppac_core::workload::{PerfReport, PerfRequest, RunReport, RunRequest};
use ppac_core::{ArrayGeometry, NumberFormat, SimOptions};

#[derive(Debug, Error)]
pub enum ClientError {
    /// The service rejected the request.
    #[error("{message}")]
    Api {
        status: u16,
        code: String,
        message: String,
    },
    #[error("transport: {0}")]
    Transport(#[from] reqwest::Error),
}

impl ClientError {
    pub fn code(&self) -> &str {
        match self {
            ClientError::Api { code, .. } => code,
            ClientError::Transport(_) => "E_TRANSPORT",
        }
    }
}

pub type Result<T> = std::result::Result<T, ClientError>;

#[derive(Deserialize)]
struct ApiError {
    code: String,
    message: String,
}

#[derive(Deserialize)]
struct Results {
    results: Vec<ModeResult>,
}

#[derive(Deserialize)]
struct Cycles {
    cycles: u64,
}

#[derive(Deserialize)]
struct SessionInfo {
    id: u64,
}

#[derive(Debug, Clone)]
pub struct Client {
    base: String,
    http: reqwest::Client,
}

impl Client {
    /// `base` is e.g. `http://127.0.0.1:8080`.
    pub fn new(base: impl Into<String>) -> Self {
        Client {
            base: base.into().trim_end_matches('/').to_string(),
            http: reqwest::Client::new(),
        }
    }

    async fn decode<T: DeserializeOwned>(resp: reqwest::Response) -> Result<T> {
        let status = resp.status();
        if status.is_success() {
            return Ok(resp.json().await?);
        }
        let body = resp.text().await?;
        let (code, message) = match serde_json::from_str::<ApiError>(&body) {
            Ok(e) => (e.code, e.message),
            Err(_) => ("E_HTTP".to_string(), format!("{status}: {body}")),
        };
        Err(ClientError::Api {
            status: status.as_u16(),
            code,
            message,
        })
    }

    async fn post<B: Serialize + ?Sized, T: DeserializeOwned>(
        &self,
        path: &str,
        body: &B,
    ) -> Result<T> {
        let resp = self
            .http
            .post(format!("{}{path}", self.base))
            .json(body)
            .send()
            .await?;
        Self::decode(resp).await
    }

    pub async fn health(&self) -> Result<()> {
        let resp = self
            .http
            .get(format!("{}/health", self.base))
            .send()
            .await?;
        let _: serde_json::Value = Self::decode(resp).await?;
        Ok(())
    }

    pub async fn run(&self, req: &RunRequest) -> Result<RunReport> {
        self.post("/v1/run", req).await
    }

    pub async fn difftest(&self, config: &DifftestConfig) -> Result<DifftestSummary> {
        self.post("/v1/difftest", config).await
    }

    pub async fn perf(&self, req: &PerfRequest) -> Result<PerfReport> {
        self.post("/v1/perf", req).await
    }

    pub async fn create_session(
        &self,
        geometry: ArrayGeometry,
        options: Option<SimOptions>,
    ) -> Result<RemoteSession> {
        let info: SessionInfo = self
            .post(
                "/v1/sessions",
                &serde_json::json!({ "geometry": geometry, "options": options }),
            )
            .await?;
        Ok(RemoteSession {
            client: self.clone(),
            id: info.id,
        })
    }
}

/// A session held by the service.
#[derive(Debug, Clone)]
pub struct RemoteSession {
    client: Client,
    id: u64,
}

impl RemoteSession {
    pub fn id(&self) -> u64 {
        self.id
    }

    fn path(&self, tail: &str) -> String {
        format!("/v1/sessions/{}/{tail}", self.id)
    }

    pub async fn load_matrix(&self, matrix: &IntMatrix) -> Result<StoredMatrixLayout> {
        self.client
            .post(
                &self.path("matrix"),
                &serde_json::json!({ "matrix": matrix }),
            )
            .await
    }

    pub async fn set_bias(&self, bias: &[i64]) -> Result<()> {
        self.client
            .post(&self.path("bias"), &serde_json::json!({ "bias": bias }))
            .await
    }

    pub async fn prepare_reg_n(&self, vector_format: NumberFormat) -> Result<u64> {
        let c: Cycles = self
            .client
            .post(
                &self.path("reg-n"),
                &serde_json::json!({ "vector_format": vector_format }),
            )
            .await?;
        Ok(c.cycles)
    }

    async fn vectors(
        &self,
        tail: &str,
        vectors: &IntMatrix,
        thresholds: Option<&[i64]>,
    ) -> Result<Vec<ModeResult>> {
        let r: Results = self
            .client
            .post(
                &self.path(tail),
                &serde_json::json!({ "vectors": vectors, "thresholds": thresholds }),
            )
            .await?;
        Ok(r.results)
    }

    pub async fn mvp(&self, vectors: &IntMatrix) -> Result<Vec<ModeResult>> {
        self.vectors("mvp", vectors, None).await
    }

    pub async fn hamming(&self, vectors: &IntMatrix) -> Result<Vec<ModeResult>> {
        self.vectors("hamming", vectors, None).await
    }

    /// Complete match when `thresholds` is `None`.
    pub async fn cam(
        &self,
        vectors: &IntMatrix,
        thresholds: Option<&[i64]>,
    ) -> Result<Vec<ModeResult>> {
        self.vectors("cam", vectors, thresholds).await
    }

    pub async fn gf2(&self, vectors: &IntMatrix) -> Result<Vec<ModeResult>> {
        self.vectors("gf2", vectors, None).await
    }

    pub async fn program_pla(&self, program: &PlaProgram) -> Result<()> {
        self.client.post(&self.path("pla/program"), program).await
    }

    pub async fn eval_pla(&self, assignments: &[Vec<bool>]) -> Result<Vec<ModeResult>> {
        let r: Results = self
            .client
            .post(
                &self.path("pla/eval"),
                &serde_json::json!({ "assignments": assignments }),
            )
            .await?;
        Ok(r.results)
    }

    pub async fn close(self) -> Result<()> {
        let resp = self
            .client
            .http
            .delete(format!("{}/v1/sessions/{}", self.client.base, self.id))
            .send()
            .await?;
        if resp.status() == StatusCode::NO_CONTENT {
            Ok(())
        } else {
            Self::decode_unit(resp).await
        }
    }

    async fn decode_unit(resp: reqwest::Response) -> Result<()> {
        let _: serde_json::Value = Client::decode(resp).await?;
        Ok(())
    }
}
