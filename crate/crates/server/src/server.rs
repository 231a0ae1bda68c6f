//! The coordinator: one thread owns every document and handles messages in
//! arrival order. Executions run on a worker pool and come back as
//! completion events, so a slow program never delays request handling.

use std::collections::{BTreeSet, HashMap};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::thread::JoinHandle;
use std::time::{Duration, Instant};

use crossbeam_channel::{select, unbounded, Receiver, Sender};
use livediag_core::diagnostics::Diagnostic;
use livediag_core::edit::{InteractionParams, InteractionSession, PlanError, PredictionDelta, Scheduler, SessionError};
use livediag_core::interp::DEFAULT_STEP_BUDGET;
use livediag_core::pipeline::{compile_with_budget, Compiled};
use livediag_core::syntax::{apply_to_text, SourceDocument};
use log::{debug, warn};
use serde_json::{json, Value};

use crate::protocol::*;

pub type ClientId = u64;

#[derive(Debug, Clone)]
pub struct ServerConfig {
    pub workers: usize,
    /// Artificial delay before every execution; for exercising the scheduler.
    pub execution_delay: Duration,
    pub step_budget: u64,
}

impl Default for ServerConfig {
    fn default() -> Self {
        let cores = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(2);
        ServerConfig { workers: cores.clamp(1, 4), execution_delay: Duration::ZERO, step_budget: DEFAULT_STEP_BUDGET }
    }
}

enum Inbound {
    Connect { client: ClientId, out: Sender<String> },
    Message { client: ClientId, text: String },
    Disconnect { client: ClientId },
    Shutdown,
}

/// Ties a job to the interaction whose params it renders.
#[derive(Debug, Clone, Copy)]
struct JobInteraction {
    session: u64,
    params: InteractionParams,
}

struct Job {
    uri: String,
    epoch: u64,
    version: u64,
    text: String,
    interaction: Option<JobInteraction>,
}

struct Done {
    uri: String,
    epoch: u64,
    version: u64,
    interaction: Option<JobInteraction>,
    compiled: Compiled,
    model_json: Option<String>,
    elapsed: Duration,
}

/// Handle to a running server. Dropping it shuts the server down.
pub struct Server {
    inbox: Sender<Inbound>,
    next_client: Arc<AtomicU64>,
    thread: Option<JoinHandle<()>>,
    workers: Vec<JoinHandle<()>>,
}

impl Server {
    pub fn start(config: ServerConfig) -> Server {
        let (inbox, inbound) = unbounded();
        let (job_tx, job_rx) = unbounded::<Job>();
        let (done_tx, done_rx) = unbounded::<Done>();
        let workers = (0..config.workers.max(1))
            .map(|i| {
                let (jobs, done, cfg) = (job_rx.clone(), done_tx.clone(), config.clone());
                std::thread::Builder::new()
                    .name(format!("livediag-worker-{i}"))
                    .spawn(move || worker(jobs, done, cfg))
                    .expect("spawn worker")
            })
            .collect();
        drop(done_tx);
        let thread = std::thread::Builder::new()
            .name("livediag-coordinator".into())
            .spawn(move || {
                let mut c = Coordinator { clients: HashMap::new(), docs: HashMap::new(), jobs: job_tx, next_epoch: 0, next_session: 0 };
                c.run(inbound, done_rx);
            })
            .expect("spawn coordinator");
        Server { inbox, next_client: Arc::new(AtomicU64::new(1)), thread: Some(thread), workers }
    }

    /// Register a client. Everything the server sends it arrives on
    /// `Connection::outgoing`, one JSON message per string.
    pub fn connect(&self) -> Connection {
        self.connector().connect()
    }

    /// A cloneable handle for accepting clients from other threads.
    pub fn connector(&self) -> Connector {
        Connector { inbox: self.inbox.clone(), next_client: self.next_client.clone() }
    }

    pub fn shutdown(mut self) {
        self.stop();
    }

    fn stop(&mut self) {
        let _ = self.inbox.send(Inbound::Shutdown);
        if let Some(t) = self.thread.take() {
            let _ = t.join();
        }
        // the coordinator dropped the job sender, so workers drain and exit
        for w in self.workers.drain(..) {
            let _ = w.join();
        }
    }
}

impl Drop for Server {
    fn drop(&mut self) {
        self.stop();
    }
}

#[derive(Clone)]
pub struct Connector {
    inbox: Sender<Inbound>,
    next_client: Arc<AtomicU64>,
}

impl Connector {
    pub fn connect(&self) -> Connection {
        let client = self.next_client.fetch_add(1, Ordering::Relaxed);
        let (out, outgoing) = unbounded();
        let _ = self.inbox.send(Inbound::Connect { client, out });
        Connection { client, inbox: self.inbox.clone(), outgoing }
    }
}

/// One client's link to the coordinator.
pub struct Connection {
    pub client: ClientId,
    inbox: Sender<Inbound>,
    pub outgoing: Receiver<String>,
}

impl Connection {
    pub fn send(&self, text: impl Into<String>) {
        let _ = self.inbox.send(Inbound::Message { client: self.client, text: text.into() });
    }
}

impl Drop for Connection {
    fn drop(&mut self) {
        let _ = self.inbox.send(Inbound::Disconnect { client: self.client });
    }
}

fn worker(jobs: Receiver<Job>, done: Sender<Done>, config: ServerConfig) {
    for job in jobs {
        if !config.execution_delay.is_zero() {
            std::thread::sleep(config.execution_delay);
        }
        let started = Instant::now();
        let compiled = compile_with_budget(&job.text, config.step_budget);
        let model_json = compiled.render_model().map(|m| serde_json::to_string(&m).expect("render model serializes"));
        let elapsed = started.elapsed();
        debug!("executed {} v{} in {:?}", job.uri, job.version, elapsed);
        let result = Done {
            uri: job.uri,
            epoch: job.epoch,
            version: job.version,
            interaction: job.interaction,
            compiled,
            model_json,
            elapsed,
        };
        if done.send(result).is_err() {
            return;
        }
    }
}

/// Last successful render of a document.
struct Rendered {
    compiled: Arc<Compiled>,
    version: u64,
    model_json: Arc<String>,
}

struct Active {
    id: u64,
    session: InteractionSession,
}

struct Doc {
    epoch: u64,
    doc: SourceDocument,
    seq: u64,
    good: Option<Rendered>,
    diagnostics: Vec<Diagnostic>,
    diagnostics_version: u64,
    subscribers: BTreeSet<ClientId>,
    interaction: Option<Active>,
    scheduler: Scheduler,
    /// The latest execution produced no diagram; `good` is older.
    stale: bool,
    last_elapsed: Duration,
}

struct Coordinator {
    clients: HashMap<ClientId, Sender<String>>,
    docs: HashMap<String, Doc>,
    jobs: Sender<Job>,
    next_epoch: u64,
    next_session: u64,
}

type Reply = Result<Value, ServerError>;

impl Coordinator {
    fn run(&mut self, inbound: Receiver<Inbound>, done: Receiver<Done>) {
        loop {
            select! {
                recv(inbound) -> msg => match msg {
                    Ok(Inbound::Connect { client, out }) => {
                        self.clients.insert(client, out);
                    }
                    Ok(Inbound::Message { client, text }) => self.handle_text(client, &text),
                    Ok(Inbound::Disconnect { client }) => self.disconnect(client),
                    Ok(Inbound::Shutdown) | Err(_) => return,
                },
                recv(done) -> d => match d {
                    Ok(d) => self.completed(d),
                    Err(_) => return,
                },
            }
        }
    }

    fn send(&self, client: ClientId, text: String) {
        if let Some(out) = self.clients.get(&client) {
            let _ = out.send(text);
        }
    }

    fn broadcast(&self, uri: &str, text: String) {
        if let Some(d) = self.docs.get(uri) {
            for c in &d.subscribers {
                self.send(*c, text.clone());
            }
        }
    }

    fn disconnect(&mut self, client: ClientId) {
        self.clients.remove(&client);
        for d in self.docs.values_mut() {
            d.subscribers.remove(&client);
        }
    }

    fn handle_text(&mut self, client: ClientId, text: &str) {
        let msg = match decode(text) {
            Ok(m) => m,
            Err((id, err)) => {
                debug!("rejected message from {client}: {err}");
                self.send(client, error_response(&id, &err));
                return;
            }
        };
        let reply = self.dispatch(client, &msg.method, msg.params);
        if let Some(id) = msg.id {
            let text = match reply {
                Ok(v) => response(&id, v),
                Err(e) => error_response(&id, &e),
            };
            self.send(client, text);
        } else if let Err(e) = reply {
            warn!("notification {} failed: {e}", msg.method);
        }
    }

    fn dispatch(&mut self, client: ClientId, method: &str, params: Value) -> Reply {
        match method {
            "initialize" => Ok(json!({
                "protocolVersion": PROTOCOL_VERSION,
                "schemaVersion": livediag_core::render::SCHEMA_VERSION,
                "exportFormats": ["svg"],
            })),
            "document/open" => self.open(client, parse_params(params)?),
            "document/change" => self.change(parse_params(params)?),
            "document/close" => self.close(parse_params(params)?),
            "document/subscribe" => self.subscribe(client, parse_params(params)?),
            "document/unsubscribe" => {
                let p: UriParams = parse_params(params)?;
                self.doc_mut(&p.uri)?.subscribers.remove(&client);
                Ok(json!({}))
            }
            "interaction/start" => self.start_interaction(parse_params(params)?),
            "interaction/update" => self.update_interaction(parse_params(params)?),
            "interaction/end" => self.end_interaction(parse_params(params)?),
            "source/reveal" => self.reveal(parse_params(params)?),
            "diagram/export" => self.export(parse_params(params)?),
            "debug/stats" => self.stats(parse_params(params)?),
            other => Err(ServerError::MethodNotFound(other.to_owned())),
        }
    }

    fn doc_mut(&mut self, uri: &str) -> Result<&mut Doc, ServerError> {
        self.docs.get_mut(uri).ok_or_else(|| ServerError::UnknownDocument(uri.to_owned()))
    }

    fn doc(&self, uri: &str) -> Result<&Doc, ServerError> {
        self.docs.get(uri).ok_or_else(|| ServerError::UnknownDocument(uri.to_owned()))
    }

    fn open(&mut self, client: ClientId, p: OpenParams) -> Reply {
        let version = match self.docs.get_mut(&p.uri) {
            // reopening replaces the text like a whole-document change
            Some(d) => {
                d.interaction = None;
                d.doc = SourceDocument::new(p.uri.clone(), p.text, d.doc.version + 1);
                d.subscribers.insert(client);
                d.doc.version
            }
            None => {
                self.next_epoch += 1;
                let doc = Doc {
                    epoch: self.next_epoch,
                    doc: SourceDocument::new(p.uri.clone(), p.text, 1),
                    seq: 0,
                    good: None,
                    diagnostics: Vec::new(),
                    diagnostics_version: 0,
                    subscribers: BTreeSet::from([client]),
                    interaction: None,
                    scheduler: Scheduler::default(),
                    stale: false,
                    last_elapsed: Duration::ZERO,
                };
                self.docs.insert(p.uri.clone(), doc);
                1
            }
        };
        self.schedule(&p.uri);
        Ok(json!({ "uri": p.uri, "version": version }))
    }

    fn change(&mut self, p: ChangeParams) -> Reply {
        let d = self.doc_mut(&p.uri)?;
        if p.version != d.doc.version + 1 {
            return Err(ServerError::VersionMismatch { expected: d.doc.version + 1, found: p.version });
        }
        let text = match (p.edits, p.text) {
            (Some(edits), None) => apply_to_text(&d.doc.text, &edits).map_err(|e| ServerError::InvalidEdit(e.to_string()))?,
            (None, Some(text)) => text,
            _ => return Err(ServerError::InvalidParams("exactly one of `edits` and `text` is required".into())),
        };
        d.doc = SourceDocument::new(p.uri.clone(), text, p.version);
        // an active interaction notices the foreign version on its next message
        self.schedule(&p.uri);
        Ok(json!({ "uri": p.uri, "version": p.version }))
    }

    fn close(&mut self, p: UriParams) -> Reply {
        self.docs.remove(&p.uri).ok_or_else(|| ServerError::UnknownDocument(p.uri.clone()))?;
        Ok(json!({}))
    }

    fn subscribe(&mut self, client: ClientId, p: UriParams) -> Reply {
        let d = self.doc_mut(&p.uri)?;
        d.subscribers.insert(client);
        let d = self.doc(&p.uri)?;
        // bring the new subscriber up to date
        if let Some(g) = &d.good {
            self.send(client, update_message(&p.uri, d.seq, g.version, d.stale, &g.model_json));
        }
        if d.diagnostics_version > 0 {
            self.send(client, diagnostics_message(&p.uri, d.diagnostics_version, &d.diagnostics));
        }
        Ok(json!({ "uri": p.uri, "version": d.doc.version, "seq": d.seq }))
    }

    fn schedule(&mut self, uri: &str) {
        let Some(d) = self.docs.get_mut(uri) else { return };
        if d.scheduler.request() {
            let job = Job {
                uri: uri.to_owned(),
                epoch: d.epoch,
                version: d.doc.version,
                text: d.doc.text.clone(),
                interaction: d.interaction.as_ref().map(|a| JobInteraction { session: a.id, params: a.session.current }),
            };
            let _ = self.jobs.send(job);
        }
    }

    fn completed(&mut self, done: Done) {
        let Some(d) = self.docs.get_mut(&done.uri) else { return };
        if d.epoch != done.epoch {
            return;
        }
        d.last_elapsed = done.elapsed;
        let compiled = Arc::new(done.compiled);
        let diagnostics = compiled.diagnostics();
        let mut messages = Vec::new();
        match done.model_json {
            Some(json) => {
                d.seq += 1;
                let json = Arc::new(json);
                messages.push(update_message(&done.uri, d.seq, done.version, false, &json));
                d.stale = false;
                d.good = Some(Rendered { compiled, version: done.version, model_json: json });
            }
            None => {
                // stale but visible: the last good diagram stays on screen
                d.stale = true;
                if let Some(g) = &d.good {
                    d.seq += 1;
                    messages.push(update_message(&done.uri, d.seq, g.version, true, &g.model_json));
                }
            }
        }
        d.diagnostics = diagnostics;
        d.diagnostics_version = done.version;
        messages.push(diagnostics_message(&done.uri, done.version, &d.diagnostics));
        if let (Some(active), Some(job)) = (d.interaction.as_mut(), done.interaction) {
            if active.id == job.session {
                if let Some(delta) = active.session.rendered(job.params) {
                    if !delta.is_empty() {
                        messages.push(incremental_message(&done.uri, d.seq, &delta));
                    }
                }
            }
        }
        let again = d.scheduler.complete();
        for m in messages {
            self.broadcast(&done.uri, m);
        }
        if again {
            // `complete` already counted the coalesced run as started
            let d = self.docs.get_mut(&done.uri).expect("still open");
            let job = Job {
                uri: done.uri.clone(),
                epoch: d.epoch,
                version: d.doc.version,
                text: d.doc.text.clone(),
                interaction: d.interaction.as_ref().map(|a| JobInteraction { session: a.id, params: a.session.current }),
            };
            let _ = self.jobs.send(job);
        }
    }

    fn start_interaction(&mut self, p: StartParams) -> Reply {
        self.next_session += 1;
        let id = self.next_session;
        let d = self.doc_mut(&p.uri)?;
        if d.interaction.is_some() {
            return Err(ServerError::InteractionActive);
        }
        let good = d.good.as_ref().ok_or(ServerError::NoRender)?;
        if good.version != d.doc.version {
            return Err(ServerError::SessionStale { expected: d.doc.version, found: good.version });
        }
        let session = InteractionSession::begin(&d.doc, &good.compiled, &p.element_id, p.kind, p.anchor_end).map_err(plan_error)?;
        let result = json!({
            "uri": p.uri,
            "target": session.plan.target,
            "kind": p.kind,
            "insertion": session.plan.is_insertion(),
            "version": d.doc.version,
        });
        d.interaction = Some(Active { id, session });
        Ok(result)
    }

    /// Check the interaction is still in step with the document; a foreign
    /// change aborts it and forces a full execution.
    fn active(&mut self, uri: &str) -> Result<(), ServerError> {
        let d = self.doc_mut(uri)?;
        let active = d.interaction.as_ref().ok_or(ServerError::NoActiveInteraction)?;
        if let Err(SessionError::SessionStale { expected, found }) = active.session.check_version(d.doc.version) {
            d.interaction = None;
            self.schedule(uri);
            return Err(ServerError::SessionStale { expected, found });
        }
        Ok(())
    }

    fn apply_update(&mut self, uri: &str, params: InteractionParams, last: bool) -> Result<u64, ServerError> {
        let d = self.doc_mut(uri)?;
        let active = d.interaction.as_mut().expect("checked by caller");
        let out = active.session.update(params).map_err(|e| ServerError::InvalidParams(e.to_string()))?;
        let changed = !out.edits.is_empty();
        if changed {
            d.doc = out.document;
        }
        let version = d.doc.version;
        let seq = d.seq;
        if changed || last {
            let mut edit = json!({ "uri": uri, "edits": out.edits, "version": version });
            if last {
                edit["final"] = json!(true);
            }
            self.broadcast(uri, notification("document/edit", edit));
        }
        if !out.delta.is_empty() {
            self.broadcast(uri, incremental_message(uri, seq, &out.delta));
        }
        Ok(version)
    }

    fn update_interaction(&mut self, p: UpdateParams) -> Reply {
        self.active(&p.uri)?;
        let version = self.apply_update(&p.uri, p.params, false)?;
        self.schedule(&p.uri);
        Ok(json!({ "uri": p.uri, "version": version }))
    }

    fn end_interaction(&mut self, p: EndParams) -> Reply {
        self.active(&p.uri)?;
        let params = match p.params {
            Some(params) => params,
            None => self.doc(&p.uri)?.interaction.as_ref().expect("active").session.current,
        };
        let version = self.apply_update(&p.uri, params, true)?;
        self.doc_mut(&p.uri)?.interaction = None;
        // the final full execution renders the text the editor now holds
        self.schedule(&p.uri);
        Ok(json!({ "uri": p.uri, "version": version }))
    }

    fn reveal(&mut self, p: RevealParams) -> Reply {
        let d = self.doc(&p.uri)?;
        let good = d.good.as_ref().ok_or(ServerError::NoRender)?;
        let origins = &good.compiled.execution.element_origins;
        // inner parts of a class or connection reveal their owner
        let mut id = p.element_id.as_str();
        let span = loop {
            if let Some(span) = origins.get(id) {
                break *span;
            }
            match id.rfind('/') {
                Some(i) => id = &id[..i],
                None => return Err(ServerError::UnknownElement(p.element_id.clone())),
            }
        };
        if id == "canvas0" && p.element_id != "canvas0" {
            return Err(ServerError::UnknownElement(p.element_id.clone()));
        }
        Ok(json!({ "uri": p.uri, "elementId": id, "span": span, "version": good.version }))
    }

    fn export(&mut self, p: ExportParams) -> Reply {
        let d = self.doc(&p.uri)?;
        if p.format != "svg" {
            return Err(ServerError::UnsupportedFormat(p.format));
        }
        let good = d.good.as_ref().ok_or(ServerError::NoRender)?;
        let content = good.compiled.svg().ok_or(ServerError::NoRender)?;
        Ok(json!({ "uri": p.uri, "format": "svg", "version": good.version, "content": content }))
    }

    fn stats(&mut self, p: StatsParams) -> Reply {
        let one = |d: &Doc| DocumentStats {
            version: d.doc.version,
            seq: d.seq,
            started: d.scheduler.started,
            completed: d.scheduler.completed,
            coalesced: d.scheduler.coalesced,
            in_flight: d.scheduler.in_flight(),
            max_in_flight: d.scheduler.max_in_flight,
            interaction_active: d.interaction.is_some(),
        };
        match p.uri {
            Some(uri) => {
                let d = self.doc(&uri)?;
                let mut v = serde_json::to_value(one(d)).expect("stats serialize");
                v["lastExecutionMs"] = json!(d.last_elapsed.as_secs_f64() * 1000.0);
                Ok(v)
            }
            None => {
                let docs: serde_json::Map<String, Value> =
                    self.docs.iter().map(|(u, d)| (u.clone(), serde_json::to_value(one(d)).expect("stats serialize"))).collect();
                Ok(json!({ "documents": docs, "clients": self.clients.len() }))
            }
        }
    }
}

fn plan_error(e: PlanError) -> ServerError {
    match e {
        PlanError::NotEditable { span, message } => ServerError::NotEditable { message, start: span.start, end: span.end },
        PlanError::UnknownElement { id } => ServerError::UnknownElement(id),
    }
}

/// `diagram/update` with the pre-serialized render model spliced in.
fn update_message(uri: &str, seq: u64, version: u64, stale: bool, model_json: &str) -> String {
    format!(
        "{{\"jsonrpc\":\"2.0\",\"method\":\"diagram/update\",\"params\":{{\"uri\":{},\"seq\":{seq},\"version\":{version},\"stale\":{stale},\"renderModel\":{model_json}}}}}",
        Value::String(uri.to_owned())
    )
}

fn diagnostics_message(uri: &str, version: u64, items: &[Diagnostic]) -> String {
    notification("diagram/diagnostics", json!({ "uri": uri, "version": version, "items": items }))
}

fn incremental_message(uri: &str, based_on_seq: u64, delta: &PredictionDelta) -> String {
    notification("diagram/incremental", json!({ "uri": uri, "basedOnSeq": based_on_seq, "deltas": delta }))
}
