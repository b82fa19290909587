//! Line-oriented text formats for type graphs and instances.
//!
//! ```text
//! typegraph v1
//! ntype <id> <name> problem|solution
//! etype <id> <name> <src_ntype> <tar_ntype> <src_lb> <src_ub|*> <tar_lb> <tar_ub|*> problem|solution
//!
//! instance v1 typegraph=<path-or-name>
//! node <id> <ntype>
//! edge <id> <etype> <src_node> <tar_node>
//! ```
//!
//! Blank lines and lines starting with `#` are ignored.

use std::fmt::Write as _;

use super::{
    EdgeId, EdgeType, EdgeTypeId, GraphError, InstanceGraph, Multiplicity, NodeId, NodeTypeId, Result, TypeGraph,
};

fn err(line: usize, msg: impl Into<String>) -> GraphError {
    GraphError::Parse { line, msg: msg.into() }
}

fn records(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let l = l.trim();
        (!l.is_empty() && !l.starts_with('#')).then(|| (i + 1, l.split_whitespace().collect()))
    })
}

fn num(line: usize, tok: &str, what: &str) -> Result<u32> {
    tok.parse().map_err(|_| err(line, format!("invalid {what} '{tok}'")))
}

fn upper(line: usize, tok: &str) -> Result<Option<u32>> {
    if tok == "*" {
        Ok(None)
    } else {
        num(line, tok, "upper bound").map(Some)
    }
}

fn role(line: usize, tok: &str) -> Result<bool> {
    match tok {
        "problem" => Ok(true),
        "solution" => Ok(false),
        _ => Err(err(line, format!("expected problem|solution, found '{tok}'"))),
    }
}

fn arity(line: usize, rec: &[&str], n: usize) -> Result<()> {
    if rec.len() != n {
        return Err(err(line, format!("'{}' record takes {} fields, found {}", rec[0], n - 1, rec.len() - 1)));
    }
    Ok(())
}

pub fn parse_type_graph(text: &str) -> Result<TypeGraph> {
    let mut recs = records(text);
    match recs.next() {
        Some((_, h)) if h == ["typegraph", "v1"] => {}
        Some((line, _)) => return Err(err(line, "expected header 'typegraph v1'")),
        None => return Err(err(1, "empty type graph file")),
    }
    let mut tg = TypeGraph::new();
    for (line, rec) in recs {
        match rec[0] {
            "ntype" => {
                arity(line, &rec, 4)?;
                let id = NodeTypeId(num(line, rec[1], "node type id")?);
                let problem = role(line, rec[3])?;
                tg.add_node_type(id, rec[2], problem).map_err(|e| err(line, e.to_string()))?;
            }
            "etype" => {
                arity(line, &rec, 10)?;
                let id = EdgeTypeId(num(line, rec[1], "edge type id")?);
                let src = NodeTypeId(num(line, rec[3], "node type id")?);
                let tar = NodeTypeId(num(line, rec[4], "node type id")?);
                let m_src = Multiplicity::new(num(line, rec[5], "lower bound")?, upper(line, rec[6])?)
                    .map_err(|e| err(line, e.to_string()))?;
                let m_tar = Multiplicity::new(num(line, rec[7], "lower bound")?, upper(line, rec[8])?)
                    .map_err(|e| err(line, e.to_string()))?;
                let problem = role(line, rec[9])?;
                let ty = EdgeType { name: rec[2].to_string(), src, tar, m_src, m_tar, problem };
                tg.add_edge_type(id, ty).map_err(|e| err(line, e.to_string()))?;
            }
            other => return Err(err(line, format!("unknown record kind '{other}'"))),
        }
    }
    Ok(tg)
}

fn write_ub(out: &mut String, m: Multiplicity) {
    match m.ub {
        Some(ub) => write!(out, "{} {}", m.lb, ub).unwrap(),
        None => write!(out, "{} *", m.lb).unwrap(),
    }
}

pub fn write_type_graph(tg: &TypeGraph) -> String {
    let mut out = String::from("typegraph v1\n");
    for (id, t) in tg.node_types() {
        let role = if t.problem { "problem" } else { "solution" };
        writeln!(out, "ntype {} {} {role}", id.0, t.name).unwrap();
    }
    for (id, t) in tg.edge_types() {
        write!(out, "etype {} {} {} {} ", id.0, t.name, t.src.0, t.tar.0).unwrap();
        write_ub(&mut out, t.m_src);
        out.push(' ');
        write_ub(&mut out, t.m_tar);
        writeln!(out, " {}", if t.problem { "problem" } else { "solution" }).unwrap();
    }
    out
}

/// A parsed instance file: the graph and the type graph reference from its
/// header.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstanceFile {
    pub typegraph: String,
    pub graph: InstanceGraph,
}

pub fn parse_instance(text: &str) -> Result<InstanceFile> {
    let mut recs = records(text);
    let typegraph = match recs.next() {
        Some((line, h)) => {
            if h.len() != 3 || h[0] != "instance" || h[1] != "v1" {
                return Err(err(line, "expected header 'instance v1 typegraph=<ref>'"));
            }
            match h[2].strip_prefix("typegraph=") {
                Some(r) if !r.is_empty() => r.to_string(),
                _ => return Err(err(line, "header lacks typegraph=<ref>")),
            }
        }
        None => return Err(err(1, "empty instance file")),
    };
    let mut g = InstanceGraph::new();
    for (line, rec) in recs {
        match rec[0] {
            "node" => {
                arity(line, &rec, 3)?;
                let id = NodeId(num(line, rec[1], "node id")?);
                let ty = NodeTypeId(num(line, rec[2], "node type id")?);
                g.add_node(id, ty).map_err(|e| err(line, e.to_string()))?;
            }
            "edge" => {
                arity(line, &rec, 5)?;
                let id = EdgeId(num(line, rec[1], "edge id")?);
                let ty = EdgeTypeId(num(line, rec[2], "edge type id")?);
                let src = NodeId(num(line, rec[3], "node id")?);
                let tar = NodeId(num(line, rec[4], "node id")?);
                g.add_edge(id, ty, src, tar).map_err(|e| err(line, e.to_string()))?;
            }
            other => return Err(err(line, format!("unknown record kind '{other}'"))),
        }
    }
    Ok(InstanceFile { typegraph, graph: g })
}

pub fn write_instance(g: &InstanceGraph, typegraph: &str) -> String {
    let mut out = format!("instance v1 typegraph={typegraph}\n");
    for (id, ty) in g.nodes() {
        writeln!(out, "node {} {}", id.0, ty.0).unwrap();
    }
    for (id, e) in g.edges() {
        writeln!(out, "edge {} {} {} {}", id.0, e.ty.0, e.src.0, e.tar.0).unwrap();
    }
    out
}
