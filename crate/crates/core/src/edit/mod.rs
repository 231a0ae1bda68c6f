//! Graphical interactions: edit plans, per-update text edits, predictions
//! and the single-in-flight execution scheduler.

mod plan;
mod predict;

use serde::Serialize;
use thiserror::Error;

pub use plan::{interaction_target, plan_interaction, target_kind, AnchorEnd, EditPlan, InteractionKind, InteractionParams, PlanError};
pub use predict::{apply_prediction, predict, rigid_group, ElementDelta, EndpointDelta, PredictionDelta};

use crate::model::Diagram;
use crate::pipeline::Compiled;
use crate::syntax::{apply_to_text, parse_source, SourceDocument, TextEdit};

#[derive(Debug, Clone, PartialEq, Error, Serialize)]
#[serde(tag = "code")]
pub enum SessionError {
    #[error("document changed outside the interaction (expected version {expected}, found {found})")]
    SessionStale { expected: u64, found: u64 },
    #[error("interaction parameters must be finite numbers")]
    InvalidParams,
}

/// What one `update` produced.
#[derive(Debug, Clone, PartialEq)]
pub struct UpdateOutcome {
    /// Edits against the previous document version.
    pub edits: Vec<TextEdit>,
    pub document: SourceDocument,
    pub delta: PredictionDelta,
}

/// One graphical interaction, from pointer down to pointer up.
#[derive(Debug, Clone)]
pub struct InteractionSession {
    pub start: SourceDocument,
    pub plan: EditPlan,
    diagram: Diagram,
    pub last_rendered: InteractionParams,
    pub current: InteractionParams,
    /// Params whose text the document holds; `None` until the first edit.
    applied: Option<InteractionParams>,
    /// Document version after the session's latest edit.
    pub version: u64,
}

impl InteractionSession {
    /// `compiled` must be the result of running `doc`.
    pub fn begin(
        doc: &SourceDocument,
        compiled: &Compiled,
        element_id: &str,
        kind: InteractionKind,
        anchor: AnchorEnd,
    ) -> Result<InteractionSession, PlanError> {
        let unknown = || PlanError::UnknownElement { id: element_id.to_owned() };
        let layout = compiled.layout.as_ref().ok_or_else(unknown)?;
        let diagram = compiled.execution.diagram.clone().ok_or_else(unknown)?;
        let parsed = parse_source(&doc.text);
        let plan = plan_interaction(&doc.text, &parsed.program, &compiled.execution, layout, element_id, kind, anchor)?;
        Ok(InteractionSession {
            start: doc.clone(),
            plan,
            diagram,
            last_rendered: InteractionParams::default(),
            current: InteractionParams::default(),
            applied: None,
            version: doc.version,
        })
    }

    pub fn check_version(&self, version: u64) -> Result<(), SessionError> {
        if version == self.version {
            Ok(())
        } else {
            Err(SessionError::SessionStale { expected: self.version, found: version })
        }
    }

    /// Document text for `params`, built from the start snapshot.
    pub fn text_for(&self, params: &InteractionParams) -> String {
        apply_to_text(&self.start.text, &self.plan.edits(params)).expect("plan slots are disjoint and ordered")
    }

    pub fn update(&mut self, params: InteractionParams) -> Result<UpdateOutcome, SessionError> {
        if !params.is_finite() {
            return Err(SessionError::InvalidParams);
        }
        let edits = self.plan.incremental(&self.start.text, self.applied.as_ref(), &params);
        if !edits.is_empty() {
            self.version += 1;
            self.applied = Some(params);
        }
        let delta = predict(&self.plan, &self.diagram, &self.last_rendered, &params);
        self.current = params;
        let text = match &self.applied {
            Some(p) => self.text_for(p),
            None => self.start.text.clone(),
        };
        let document = SourceDocument::new(self.start.uri.clone(), text, self.version);
        Ok(UpdateOutcome { edits, document, delta })
    }

    /// Record that a full render for `rendered` finished; returns the
    /// catch-up prediction if the pointer moved on meanwhile.
    pub fn rendered(&mut self, rendered: InteractionParams) -> Option<PredictionDelta> {
        self.last_rendered = rendered;
        (self.current != rendered).then(|| predict(&self.plan, &self.diagram, &rendered, &self.current))
    }
}

/// Single-in-flight execution scheduling with latest-wins coalescing: any
/// number of requests during a running execution produce exactly one more.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Scheduler {
    in_flight: usize,
    pending: bool,
    pub started: u64,
    pub completed: u64,
    pub coalesced: u64,
    pub max_in_flight: usize,
}

impl Scheduler {
    /// Returns true when the caller should start an execution now.
    pub fn request(&mut self) -> bool {
        if self.in_flight > 0 {
            if self.pending {
                self.coalesced += 1;
            }
            self.pending = true;
            return false;
        }
        self.start();
        true
    }

    fn start(&mut self) {
        self.in_flight += 1;
        self.started += 1;
        self.max_in_flight = self.max_in_flight.max(self.in_flight);
    }

    /// Returns true when a coalesced request should start now.
    pub fn complete(&mut self) -> bool {
        self.in_flight = self.in_flight.saturating_sub(1);
        self.completed += 1;
        if self.pending {
            self.pending = false;
            self.start();
            return true;
        }
        false
    }

    pub fn in_flight(&self) -> usize {
        self.in_flight
    }

    pub fn is_pending(&self) -> bool {
        self.pending
    }

    pub fn is_idle(&self) -> bool {
        self.in_flight == 0 && !self.pending
    }
}
