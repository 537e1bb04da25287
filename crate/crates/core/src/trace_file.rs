//! Reading and writing the JSON trace-file format.
//!
//! ```text
//! { "entities": { "<id>": "<name>" | null, ... },      // optional
//!   "functionalities": {
//!     "<name>": { "traces": [ { "id": <int>, "accesses": ITEMS } ] } } }
//! ITEMS := [ ITEM* ]
//! ITEM  := [ <entityId:int>, "R" | "W" ]     single access
//!        | [ <count:int >= 1>, ITEMS ]       repeat block
//! ```
//!
//! A document without a `"functionalities"` key is read as the legacy flat
//! form, where every top-level key is a functionality name.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde_json::Value;

use crate::error::{Error, Result};
use crate::model::{Access, EntityId, Functionality, Mode, Monolith, Trace};

/// Maximum nesting of repeat blocks.
pub const MAX_REPEAT_DEPTH: usize = 32;

/// Maximum number of accesses a single compressed list may expand to.
pub const MAX_EXPANDED_LEN: usize = 1 << 26;

/// One element of a compressed access list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CompressedItem {
    Access(Access),
    Repeat { count: u64, items: Vec<CompressedItem> },
}

impl CompressedItem {
    fn expanded_len(&self) -> Option<usize> {
        match self {
            CompressedItem::Access(_) => Some(1),
            CompressedItem::Repeat { count, items } => {
                let inner = items.iter().try_fold(0usize, |acc, i| acc.checked_add(i.expanded_len()?))?;
                usize::try_from(*count).ok()?.checked_mul(inner)
            }
        }
    }
}

/// Flattens a compressed list depth-first.
pub fn expand_compressed_accesses(items: &[CompressedItem]) -> Result<Vec<Access>> {
    fn depth(items: &[CompressedItem]) -> usize {
        items
            .iter()
            .map(|i| match i {
                CompressedItem::Access(_) => 0,
                CompressedItem::Repeat { items, .. } => 1 + depth(items),
            })
            .max()
            .unwrap_or(0)
    }
    fn push(items: &[CompressedItem], out: &mut Vec<Access>) {
        for item in items {
            match item {
                CompressedItem::Access(a) => out.push(*a),
                CompressedItem::Repeat { count, items } => {
                    for _ in 0..*count {
                        push(items, out);
                    }
                }
            }
        }
    }

    let d = depth(items);
    if d > MAX_REPEAT_DEPTH {
        return Err(Error::Limit(format!(
            "repeat nesting depth {d} exceeds {MAX_REPEAT_DEPTH}"
        )));
    }
    let len = items
        .iter()
        .try_fold(0usize, |acc, i| acc.checked_add(i.expanded_len()?))
        .filter(|&n| n <= MAX_EXPANDED_LEN)
        .ok_or_else(|| Error::Limit(format!("expanded trace longer than {MAX_EXPANDED_LEN} accesses")))?;
    let mut out = Vec::with_capacity(len);
    push(items, &mut out);
    Ok(out)
}

/// Parses a trace file, expanding every compressed access list.
pub fn parse_trace_file(bytes: &[u8]) -> Result<Monolith> {
    let root: Value = serde_json::from_slice(bytes).map_err(|e| Error::Parse {
        offset: byte_offset(bytes, e.line(), e.column()),
        message: e.to_string(),
    })?;
    let root = as_object(&root, "$")?;

    let (functionalities, entities) = match root.get("functionalities") {
        Some(fs) => {
            let fs = as_object(fs, "$.functionalities")?;
            let entities = match root.get("entities") {
                Some(v) => parse_entities(v)?,
                None => BTreeMap::new(),
            };
            (fs, entities)
        }
        None => (root, BTreeMap::new()),
    };

    let mut parsed = Vec::with_capacity(functionalities.len());
    for (name, body) in functionalities {
        parsed.push(parse_functionality(name, body)?);
    }
    Monolith::new(parsed, entities)
}

/// Parses a compressed access list given as JSON.
pub fn parse_compressed_items(value: &Value) -> Result<Vec<CompressedItem>> {
    parse_items(value, "$", 0)
}

fn parse_entities(v: &Value) -> Result<BTreeMap<EntityId, Option<String>>> {
    let obj = as_object(v, "$.entities")?;
    let mut out = BTreeMap::new();
    for (key, name) in obj {
        let location = format!("$.entities.{key}");
        let id: i64 = key.trim().parse().map_err(|_| schema(&location, "entity key is not an integer"))?;
        let name = match name {
            Value::String(s) => Some(s.clone()),
            Value::Null => None,
            _ => return Err(schema(&location, "entity name must be a string or null")),
        };
        out.insert(EntityId(id), name);
    }
    Ok(out)
}

fn parse_functionality(name: &str, body: &Value) -> Result<Functionality> {
    let location = format!("$.{name}");
    let body = as_object(body, &location)?;
    let traces = body
        .get("traces")
        .ok_or_else(|| schema(&location, "missing `traces`"))?;
    let traces = traces
        .as_array()
        .ok_or_else(|| schema(&location, "`traces` must be an array"))?;
    let mut out = Vec::with_capacity(traces.len());
    for (i, t) in traces.iter().enumerate() {
        let loc = format!("{location}.traces[{i}]");
        let t = as_object(t, &loc)?;
        let id = t
            .get("id")
            .and_then(Value::as_u64)
            .ok_or_else(|| schema(&loc, "`id` must be a non-negative integer"))?;
        let accesses = t
            .get("accesses")
            .ok_or_else(|| schema(&loc, "missing `accesses`"))?;
        let items = parse_items(accesses, &format!("{loc}.accesses"), 0)?;
        out.push(Trace::new(id, expand_compressed_accesses(&items)?));
    }
    Ok(Functionality::new(name, out))
}

fn parse_items(v: &Value, location: &str, depth: usize) -> Result<Vec<CompressedItem>> {
    if depth > MAX_REPEAT_DEPTH {
        return Err(Error::Limit(format!(
            "repeat nesting depth exceeds {MAX_REPEAT_DEPTH} at {location}"
        )));
    }
    let arr = v
        .as_array()
        .ok_or_else(|| schema(location, "access list must be an array"))?;
    let mut items = Vec::with_capacity(arr.len());
    for (i, item) in arr.iter().enumerate() {
        let loc = format!("{location}[{i}]");
        let pair = item
            .as_array()
            .filter(|p| p.len() == 2)
            .ok_or_else(|| schema(&loc, "item must be a two-element array"))?;
        match &pair[1] {
            Value::String(mode) => {
                let entity = pair[0]
                    .as_i64()
                    .ok_or_else(|| schema(&loc, "entity id must be an integer"))?;
                let mode = match mode.as_str() {
                    "R" => Mode::Read,
                    "W" => Mode::Write,
                    other => return Err(schema(&loc, &format!("unknown access mode `{other}`"))),
                };
                items.push(CompressedItem::Access(Access::new(entity, mode)));
            }
            inner @ Value::Array(_) => {
                let count = pair[0]
                    .as_i64()
                    .ok_or_else(|| schema(&loc, "repeat count must be an integer"))?;
                if count < 1 {
                    return Err(schema(&loc, &format!("repeat count {count} is below 1")));
                }
                items.push(CompressedItem::Repeat {
                    count: count as u64,
                    items: parse_items(inner, &loc, depth + 1)?,
                });
            }
            _ => return Err(schema(&loc, "second element must be a mode string or an access list")),
        }
    }
    Ok(items)
}

fn as_object<'a>(v: &'a Value, location: &str) -> Result<&'a serde_json::Map<String, Value>> {
    v.as_object().ok_or_else(|| schema(location, "expected an object"))
}

fn schema(location: &str, message: &str) -> Error {
    Error::Schema { location: location.to_string(), message: message.to_string() }
}

fn byte_offset(bytes: &[u8], line: usize, column: usize) -> usize {
    let line_start = if line <= 1 {
        0
    } else {
        bytes
            .iter()
            .enumerate()
            .filter(|(_, &b)| b == b'\n')
            .nth(line - 2)
            .map_or(bytes.len(), |(i, _)| i + 1)
    };
    (line_start + column.saturating_sub(1)).min(bytes.len())
}

/// Writes the canonical, uncompressed form: wrapper keys, every entity
/// declared, one functionality per line, keys in ascending order.
pub fn write_trace_file(m: &Monolith) -> String {
    let mut out = String::from("{\"entities\":{");
    for (i, (id, name)) in m.entities().iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        let name = match name {
            Some(n) => serde_json::to_string(n).expect("string serializes"),
            None => "null".to_string(),
        };
        let _ = write!(out, "\"{id}\":{name}");
    }
    out.push_str("},\n\"functionalities\":{");
    for (i, f) in m.functionalities().enumerate() {
        out.push_str(if i > 0 { ",\n" } else { "\n" });
        let _ = write!(out, "{}:{{\"traces\":[", serde_json::to_string(&f.name).expect("string serializes"));
        for (j, t) in f.traces.iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            let _ = write!(out, "{{\"id\":{},\"accesses\":[", t.id);
            for (k, a) in t.accesses.iter().enumerate() {
                if k > 0 {
                    out.push(',');
                }
                let _ = write!(out, "[{},\"{}\"]", a.entity, a.mode.as_str());
            }
            out.push_str("]}");
        }
        out.push_str("]}");
    }
    out.push_str("\n}}\n");
    out
}
