//! Live game sessions driven by external evader moves, with an optional
//! JSON-lines journal that can be replayed to rebuild every session.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::sync::{Arc, Mutex, RwLock};

use keepaway::game::{Game, GameConfig};
use keepaway::geometry::{ConvexPolygon, Point};
use keepaway::playbook::{Playbook, PlaybookParams};
use keepaway::sim::{Action, Episode, Event, GameState, Outcome, PursuerSpec};
use keepaway::solver::{solve, Decision, SolverParams};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorCode {
    UnknownSession,
    IllegalMove,
    MalformedConfig,
}

impl ErrorCode {
    pub fn status(self) -> u16 {
        match self {
            ErrorCode::UnknownSession => 404,
            ErrorCode::IllegalMove => 409,
            ErrorCode::MalformedConfig => 400,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("{code:?}: {message}")]
pub struct ServiceError {
    pub code: ErrorCode,
    pub message: String,
}

impl ServiceError {
    fn new(code: ErrorCode, message: impl Into<String>) -> Self {
        ServiceError { code, message: message.into() }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PursuerKind {
    #[default]
    Strategy,
    Lion,
    Guards,
    Random,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateRequest {
    pub config: GameConfig,
    #[serde(default)]
    pub pursuer: PursuerKind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub start: Option<usize>,
}

impl CreateRequest {
    /// Accepts either a full request or a bare game config.
    pub fn parse(body: &[u8]) -> Result<CreateRequest, ServiceError> {
        let malformed = |e: serde_json::Error| ServiceError::new(ErrorCode::MalformedConfig, e.to_string());
        let v: Value = serde_json::from_slice(body).map_err(malformed)?;
        if v.get("config").is_some() {
            serde_json::from_value(v).map_err(malformed)
        } else {
            let config = serde_json::from_value(v).map_err(malformed)?;
            Ok(CreateRequest { config, pursuer: PursuerKind::default(), seed: 0, start: None })
        }
    }
}

/// Move body: `{"target": j}` or `{"wait": true}`.
pub fn parse_move(body: &[u8]) -> Result<Action, ServiceError> {
    let bad = |m: &str| ServiceError::new(ErrorCode::IllegalMove, m);
    let v: Value = serde_json::from_slice(body).map_err(|e| bad(&e.to_string()))?;
    match (v.get("target"), v.get("wait")) {
        (Some(t), None) => t.as_u64().map(|j| Action::Move(j as usize)).ok_or_else(|| bad("target must be an anchor index")),
        (None, Some(Value::Bool(true))) => Ok(Action::Wait),
        _ => Err(bad("expected {\"target\": j} or {\"wait\": true}")),
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LaneInfo {
    pub from: usize,
    pub to: usize,
    pub length: f64,
    pub travel_time: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GeometryBundle {
    pub anchors: Vec<Point>,
    pub lanes: Vec<LaneInfo>,
    /// Slots of the initial formation of the solver's strategy, if any.
    pub slots: Vec<ConvexPolygon>,
    pub verdict: Decision,
    pub k: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Open,
    Finished,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Snapshot {
    pub session_id: String,
    pub status: Status,
    pub outcome: Option<Outcome>,
    pub state: GameState,
    /// Per lane in bundle order: some pursuer blocks it right now.
    pub blocked: Vec<bool>,
    /// Events since the previous poll.
    pub events: Vec<Event>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Created {
    pub session_id: String,
    pub bundle: GeometryBundle,
    pub snapshot: Snapshot,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MoveResult {
    pub accepted: bool,
    /// Events produced by this move.
    pub events: Vec<Event>,
    pub status: Status,
    pub outcome: Option<Outcome>,
    pub state: GameState,
    pub blocked: Vec<bool>,
}

pub struct Session {
    id: String,
    episode: Episode,
    cursor: usize,
}

impl Session {
    fn blocked(&self) -> Vec<bool> {
        let g = self.episode.game();
        let ps = &self.episode.state().pursuers;
        g.lanes().iter().map(|l| g.any_blocks(ps, l.from, l.to)).collect()
    }

    fn status(&self) -> Status {
        if self.episode.outcome().is_some() {
            Status::Finished
        } else {
            Status::Open
        }
    }

    fn snapshot(&mut self) -> Snapshot {
        let events = self.episode.events()[self.cursor..].to_vec();
        self.cursor = self.episode.events().len();
        Snapshot {
            session_id: self.id.clone(),
            status: self.status(),
            outcome: self.episode.outcome(),
            state: self.episode.state().clone(),
            blocked: self.blocked(),
            events,
        }
    }

    pub fn state(&self) -> &GameState {
        self.episode.state()
    }

    pub fn events(&self) -> &[Event] {
        self.episode.events()
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
enum JournalEntry {
    Create { session_id: String, request: CreateRequest },
    Move { session_id: String, action: Action },
    Close { session_id: String },
}

pub struct SessionStore {
    sessions: RwLock<HashMap<String, Arc<Mutex<Session>>>>,
    journal: Option<Mutex<File>>,
}

impl Default for SessionStore {
    fn default() -> Self {
        SessionStore::new()
    }
}

fn build(id: String, req: &CreateRequest) -> Result<(Session, GeometryBundle), ServiceError> {
    let game = Arc::new(Game::new(req.config.clone()).map_err(|e| ServiceError::new(ErrorCode::MalformedConfig, e.to_string()))?);
    if req.start.is_some_and(|s| s >= game.n()) {
        return Err(ServiceError::new(ErrorCode::MalformedConfig, "start anchor out of range"));
    }
    let solution = solve(&game, &SolverParams::default());
    let slots = solution
        .verdict
        .strategy()
        .map(|s| s.initial_formation().slots.clone())
        .unwrap_or_default();
    let spec = match req.pursuer {
        PursuerKind::Strategy => {
            let pb = solution.playbook.unwrap_or_else(|| Playbook::build(&game, &PlaybookParams::default()));
            PursuerSpec::Formation(Arc::new(pb))
        }
        PursuerKind::Lion => PursuerSpec::Lion,
        PursuerKind::Guards => PursuerSpec::Guards,
        PursuerKind::Random => PursuerSpec::Random,
    };
    let policy = spec.build(&game).map_err(|e| ServiceError::new(ErrorCode::MalformedConfig, e.to_string()))?;
    let episode = Episode::new(game.clone(), policy, req.start, req.seed)
        .map_err(|e| ServiceError::new(ErrorCode::MalformedConfig, e.to_string()))?;
    let bundle = GeometryBundle {
        anchors: game.config().anchors.clone(),
        lanes: game
            .lanes()
            .iter()
            .map(|l| LaneInfo { from: l.from, to: l.to, length: l.length, travel_time: l.travel_time })
            .collect(),
        slots,
        verdict: solution.verdict.outcome,
        k: game.k(),
    };
    Ok((Session { id, episode, cursor: 0 }, bundle))
}

impl SessionStore {
    pub fn new() -> Self {
        SessionStore { sessions: RwLock::new(HashMap::new()), journal: None }
    }

    /// Store backed by a journal file: existing entries are replayed first,
    /// new ones are appended.
    pub fn with_journal(path: &Path) -> std::io::Result<Self> {
        let mut store = if path.exists() { SessionStore::replay(path)? } else { SessionStore::new() };
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        store.journal = Some(Mutex::new(file));
        Ok(store)
    }

    /// Rebuilds all sessions by re-running the journal. Closed sessions are
    /// dropped; unreadable lines are an error.
    pub fn replay(path: &Path) -> std::io::Result<Self> {
        let store = SessionStore::new();
        let reader = BufReader::new(File::open(path)?);
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let entry: JournalEntry = serde_json::from_str(&line)
                .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, format!("line {}: {e}", i + 1)))?;
            let res = match entry {
                JournalEntry::Create { session_id, request } => store.insert(session_id, &request).map(|_| ()),
                JournalEntry::Move { session_id, action } => store.apply(&session_id, action).map(|_| ()),
                JournalEntry::Close { session_id } => store.close(&session_id),
            };
            if let Err(e) = res {
                log::warn!("journal line {}: {e}", i + 1);
            }
        }
        Ok(store)
    }

    fn record(&self, entry: &JournalEntry) {
        if let Some(j) = &self.journal {
            let mut f = j.lock().unwrap();
            let line = serde_json::to_string(entry).expect("journal entries serialize");
            if let Err(e) = writeln!(f, "{line}").and_then(|_| f.flush()) {
                log::error!("journal write failed: {e}");
            }
        }
    }

    fn insert(&self, id: String, req: &CreateRequest) -> Result<Created, ServiceError> {
        let (mut session, bundle) = build(id.clone(), req)?;
        let snapshot = session.snapshot();
        self.sessions.write().unwrap().insert(id.clone(), Arc::new(Mutex::new(session)));
        Ok(Created { session_id: id, bundle, snapshot })
    }

    pub fn create(&self, req: &CreateRequest) -> Result<Created, ServiceError> {
        let id = uuid::Uuid::new_v4().simple().to_string();
        let created = self.insert(id.clone(), req)?;
        self.record(&JournalEntry::Create { session_id: id, request: req.clone() });
        Ok(created)
    }

    fn session(&self, id: &str) -> Result<Arc<Mutex<Session>>, ServiceError> {
        self.sessions
            .read()
            .unwrap()
            .get(id)
            .cloned()
            .ok_or_else(|| ServiceError::new(ErrorCode::UnknownSession, format!("no session {id}")))
    }

    /// State plus the events since the previous poll.
    pub fn poll(&self, id: &str) -> Result<Snapshot, ServiceError> {
        let s = self.session(id)?;
        let mut s = s.lock().unwrap();
        Ok(s.snapshot())
    }

    pub fn apply(&self, id: &str, action: Action) -> Result<MoveResult, ServiceError> {
        let s = self.session(id)?;
        let mut s = s.lock().unwrap();
        let events = s
            .episode
            .step(action)
            .map_err(|e| ServiceError::new(ErrorCode::IllegalMove, e.to_string()))?
            .to_vec();
        self.record(&JournalEntry::Move { session_id: id.to_string(), action });
        Ok(MoveResult {
            accepted: true,
            events,
            status: s.status(),
            outcome: s.episode.outcome(),
            state: s.episode.state().clone(),
            blocked: s.blocked(),
        })
    }

    pub fn close(&self, id: &str) -> Result<(), ServiceError> {
        self.sessions
            .write()
            .unwrap()
            .remove(id)
            .ok_or_else(|| ServiceError::new(ErrorCode::UnknownSession, format!("no session {id}")))?;
        self.record(&JournalEntry::Close { session_id: id.to_string() });
        Ok(())
    }

    pub fn ids(&self) -> Vec<String> {
        let mut v: Vec<String> = self.sessions.read().unwrap().keys().cloned().collect();
        v.sort();
        v
    }

    /// Runs `f` on a session under its lock.
    pub fn with_session<R>(&self, id: &str, f: impl FnOnce(&Session) -> R) -> Result<R, ServiceError> {
        let s = self.session(id)?;
        let s = s.lock().unwrap();
        Ok(f(&s))
    }
}
