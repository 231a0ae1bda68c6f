use super::text::Span;

#[derive(Debug, Clone, PartialEq)]
pub enum NodeKind {
    NumberLit(f64),
    StringLit(String),
    BoolLit(bool),
    NullLit,
    Ident(String),
    /// children: `[target, value]`; target is an `Ident` or `FieldAccess`.
    Assign,
    /// children: `[callee, args...]`; `arg_names[i]` names `children[i + 1]`.
    Call { arg_names: Vec<Option<String>> },
    /// children: `[lhs, rhs]`.
    InfixCall { op: String, op_span: Span },
    /// children: body statements. `params` is empty for implicit-`it` blocks.
    FunctionLit { params: Vec<String>, implicit_it: bool },
    ListLit,
    /// children: `[receiver]`.
    FieldAccess { name: String },
    Program,
}

impl NodeKind {
    pub fn name(&self) -> &'static str {
        match self {
            NodeKind::NumberLit(_) => "NumberLit",
            NodeKind::StringLit(_) => "StringLit",
            NodeKind::BoolLit(_) => "BoolLit",
            NodeKind::NullLit => "NullLit",
            NodeKind::Ident(_) => "Ident",
            NodeKind::Assign => "Assign",
            NodeKind::Call { .. } => "Call",
            NodeKind::InfixCall { .. } => "InfixCall",
            NodeKind::FunctionLit { .. } => "FunctionLit",
            NodeKind::ListLit => "ListLit",
            NodeKind::FieldAccess { .. } => "FieldAccess",
            NodeKind::Program => "Program",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub kind: NodeKind,
    pub span: Span,
    pub children: Vec<Node>,
}

impl Node {
    pub fn new(kind: NodeKind, span: Span, children: Vec<Node>) -> Self {
        Node { kind, span, children }
    }

    pub fn leaf(kind: NodeKind, span: Span) -> Self {
        Node { kind, span, children: Vec::new() }
    }

    pub fn as_number(&self) -> Option<f64> {
        match self.kind {
            NodeKind::NumberLit(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_ident(&self) -> Option<&str> {
        match &self.kind {
            NodeKind::Ident(name) => Some(name),
            _ => None,
        }
    }

    /// Equality ignoring spans, so a re-parsed segment compares equal to the original.
    pub fn structurally_eq(&self, other: &Node) -> bool {
        let same_kind = match (&self.kind, &other.kind) {
            (NodeKind::InfixCall { op: a, .. }, NodeKind::InfixCall { op: b, .. }) => a == b,
            (NodeKind::NumberLit(a), NodeKind::NumberLit(b)) => a.to_bits() == b.to_bits(),
            (a, b) => a == b,
        };
        same_kind
            && self.children.len() == other.children.len()
            && self.children.iter().zip(&other.children).all(|(a, b)| a.structurally_eq(b))
    }

    /// Pre-order traversal.
    pub fn walk<'a>(&'a self, visit: &mut impl FnMut(&'a Node)) {
        visit(self);
        for child in &self.children {
            child.walk(visit);
        }
    }

    /// Deepest node whose span contains `offset`, with its ancestors.
    /// The root is always part of the path.
    pub fn path_at(&self, offset: usize) -> Vec<&Node> {
        let mut path = vec![self];
        let mut current = self;
        while let Some(child) = current.children.iter().find(|c| c.span.contains(offset)) {
            path.push(child);
            current = child;
        }
        path
    }

    /// First node (pre-order) whose span equals `span` exactly.
    pub fn find_exact(&self, span: Span) -> Option<&Node> {
        if self.span == span && self.kind != NodeKind::Program {
            return Some(self);
        }
        self.children
            .iter()
            .filter(|c| c.span.contains_span(span))
            .find_map(|c| c.find_exact(span))
    }
}

/// Deepest node containing `offset`, returned as a root-to-leaf path.
pub fn node_at(ast: &Node, offset: usize) -> Vec<&Node> {
    ast.path_at(offset)
}
