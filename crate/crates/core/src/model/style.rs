use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{AttrValue, Attributes, ElementKind, ElementNode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum SelectorKind {
    Type,
    Class,
    Any,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Selector {
    pub kind: SelectorKind,
    pub name: String,
}

impl Selector {
    pub fn of_type(kind: ElementKind) -> Selector {
        Selector { kind: SelectorKind::Type, name: kind.as_str().to_owned() }
    }

    pub fn class(name: &str) -> Selector {
        Selector { kind: SelectorKind::Class, name: name.to_owned() }
    }

    pub fn any() -> Selector {
        Selector { kind: SelectorKind::Any, name: String::new() }
    }

    pub fn matches(&self, kind: ElementKind, classes: &[String]) -> bool {
        match self.kind {
            SelectorKind::Type => kind.as_str() == self.name,
            SelectorKind::Class => classes.iter().any(|c| *c == self.name),
            SelectorKind::Any => true,
        }
    }
}

/// A selector chain (descendant combinators) with attributes to apply.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct StyleRule {
    pub selectors: Vec<Selector>,
    pub attributes: Attributes,
    pub source_index: usize,
}

impl StyleRule {
    /// (classCount, typeCount, sourceIndex), compared lexicographically.
    pub fn specificity(&self) -> (usize, usize, usize) {
        let count = |k| self.selectors.iter().filter(|s| s.kind == k).count();
        (count(SelectorKind::Class), count(SelectorKind::Type), self.source_index)
    }

    /// `ancestors` runs from the root down to the element's parent.
    pub fn matches(&self, kind: ElementKind, classes: &[String], ancestors: &[(ElementKind, &[String])]) -> bool {
        let Some((last, rest)) = self.selectors.split_last() else { return false };
        if !last.matches(kind, classes) {
            return false;
        }
        // greedy nearest-ancestor matching is exact for descendant combinators
        let mut remaining = ancestors.iter().rev();
        'outer: for sel in rest.iter().rev() {
            for (k, c) in remaining.by_ref() {
                if sel.matches(*k, c) {
                    continue 'outer;
                }
            }
            return false;
        }
        true
    }
}

const INHERITABLE: [&str; 8] =
    ["fontFamily", "fontSize", "fontWeight", "fontStyle", "stroke", "strokeWidth", "strokeDash", "color"];

const KNOWN: [&str; 14] = [
    "fill",
    "stroke",
    "strokeWidth",
    "strokeDash",
    "fontFamily",
    "fontSize",
    "fontWeight",
    "fontStyle",
    "color",
    "padding",
    "align",
    "margin",
    "width",
    "height",
];

pub fn is_inheritable(name: &str) -> bool {
    INHERITABLE.contains(&name)
}

pub fn is_known_attribute(name: &str) -> bool {
    KNOWN.contains(&name)
}

/// Value used when neither rules, locals nor ancestors supply one.
pub fn initial_value(name: &str) -> Option<AttrValue> {
    Some(match name {
        "fill" => AttrValue::from("none"),
        "stroke" | "color" => AttrValue::from("#000000"),
        "strokeWidth" => AttrValue::Number(1.0),
        "fontFamily" => AttrValue::from("sans-serif"),
        "fontSize" => AttrValue::Number(14.0),
        "fontWeight" | "fontStyle" => AttrValue::from("normal"),
        "strokeDash" => AttrValue::from("none"),
        "padding" => AttrValue::Number(5.0),
        "margin" => AttrValue::Number(10.0),
        "align" => AttrValue::from("start"),
        _ => return None,
    })
}

/// Resolved attribute maps keyed by element id.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ResolvedStyles {
    pub by_id: HashMap<String, Attributes>,
}

impl ResolvedStyles {
    pub fn get(&self, id: &str) -> Option<&Attributes> {
        self.by_id.get(id)
    }

    /// Attribute with the initial value as fallback.
    pub fn value(&self, id: &str, name: &str) -> Option<AttrValue> {
        self.by_id.get(id).and_then(|a| a.get(name).cloned()).or_else(|| initial_value(name))
    }

    pub fn number(&self, id: &str, name: &str) -> f64 {
        self.value(id, name).and_then(|v| v.as_number()).unwrap_or(0.0)
    }

    pub fn string(&self, id: &str, name: &str) -> String {
        match self.value(id, name) {
            Some(AttrValue::Str(s)) => s,
            Some(AttrValue::Number(n)) => crate::syntax::format_number(n),
            Some(AttrValue::Bool(b)) => b.to_string(),
            None => String::new(),
        }
    }
}

/// Cascade: inherited values, then matching rules by ascending specificity,
/// then local attributes.
pub fn resolve_styles(root: &ElementNode, rules: &[StyleRule]) -> ResolvedStyles {
    let mut order: Vec<&StyleRule> = rules.iter().collect();
    order.sort_by_key(|r| r.specificity());
    let mut out = ResolvedStyles::default();
    let mut inherited = Attributes::new();
    for name in INHERITABLE {
        if let Some(v) = initial_value(name) {
            inherited.insert(name.to_owned(), v);
        }
    }
    let mut ancestors = Vec::new();
    resolve_rec(root, &order, &inherited, &mut ancestors, &mut out);
    out
}

fn resolve_rec<'a>(
    node: &'a ElementNode,
    rules: &[&StyleRule],
    inherited: &Attributes,
    ancestors: &mut Vec<(ElementKind, &'a [String])>,
    out: &mut ResolvedStyles,
) {
    let mut attrs = inherited.clone();
    for rule in rules {
        if rule.matches(node.kind, &node.classes, ancestors) {
            for (k, v) in &rule.attributes {
                attrs.insert(k.clone(), v.clone());
            }
        }
    }
    for (k, v) in &node.attributes {
        attrs.insert(k.clone(), v.clone());
    }
    let passed: Attributes = attrs.iter().filter(|(k, _)| is_inheritable(k)).map(|(k, v)| (k.clone(), v.clone())).collect();
    ancestors.push((node.kind, &node.classes));
    for child in &node.children {
        resolve_rec(child, rules, &passed, ancestors, out);
    }
    ancestors.pop();
    out.by_id.insert(node.id.clone(), attrs);
}
