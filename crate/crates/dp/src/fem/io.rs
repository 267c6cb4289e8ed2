//! Plain-text mesh and field files.
//!
//! Mesh format: `dim d`, then `nodes n` followed by n coordinate lines,
//! `elements m` followed by m 0-based index lines, `boundary k` followed by
//! k node indices. Whitespace separated; `#` starts a comment.
//!
//! Field format: one header line `field n=<count>`, then one nodal value
//! per line.

use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fem::field::DiscreteField;
use crate::fem::mesh::Mesh;

fn tokens(text: &str) -> impl Iterator<Item = &str> {
    text.lines()
        .map(|line| line.split('#').next().unwrap_or(""))
        .flat_map(|line| line.split_whitespace())
}

fn parse<T: std::str::FromStr>(tok: Option<&str>, what: &str) -> Result<T> {
    let tok = tok.ok_or_else(|| Error::Config(format!("mesh file: missing {}", what)))?;
    tok.parse()
        .map_err(|_| Error::Config(format!("mesh file: cannot parse {} from '{}'", what, tok)))
}

fn expect_keyword(tok: Option<&str>, keyword: &str) -> Result<()> {
    match tok {
        Some(t) if t == keyword => Ok(()),
        other => Err(Error::Config(format!(
            "mesh file: expected '{}', found {:?}",
            keyword, other
        ))),
    }
}

pub fn parse_mesh(text: &str) -> Result<Mesh> {
    let mut toks = tokens(text);
    expect_keyword(toks.next(), "dim")?;
    let dim: usize = parse(toks.next(), "dimension")?;
    expect_keyword(toks.next(), "nodes")?;
    let n: usize = parse(toks.next(), "node count")?;
    let mut nodes = Vec::with_capacity(n);
    for i in 0..n {
        let mut coord = [0.0; 2];
        for axis in 0..dim {
            coord[axis] = parse(toks.next(), &format!("coordinate of node {}", i))?;
        }
        nodes.push(coord);
    }
    expect_keyword(toks.next(), "elements")?;
    let m: usize = parse(toks.next(), "element count")?;
    let mut elements = Vec::with_capacity(m * (dim + 1));
    for e in 0..m {
        for _ in 0..=dim {
            elements.push(parse(toks.next(), &format!("connectivity of element {}", e))?);
        }
    }
    expect_keyword(toks.next(), "boundary")?;
    let k: usize = parse(toks.next(), "boundary count")?;
    let mut boundary = Vec::with_capacity(k);
    for i in 0..k {
        boundary.push(parse(toks.next(), &format!("boundary node {}", i))?);
    }
    Mesh::from_parts(dim, nodes, elements, boundary)
}

pub fn read_mesh(path: &Path) -> Result<Mesh> {
    parse_mesh(&std::fs::read_to_string(path)?)
}

pub fn format_mesh(mesh: &Mesh) -> String {
    let mut out = String::new();
    out.push_str(&format!("dim {}\n", mesh.dim));
    out.push_str(&format!("nodes {}\n", mesh.n_nodes()));
    for node in &mesh.nodes {
        if mesh.dim == 1 {
            out.push_str(&format!("{:.17}\n", node[0]));
        } else {
            out.push_str(&format!("{:.17} {:.17}\n", node[0], node[1]));
        }
    }
    out.push_str(&format!("elements {}\n", mesh.n_elements()));
    for e in 0..mesh.n_elements() {
        let conn: Vec<String> = mesh.element(e).iter().map(|i| i.to_string()).collect();
        out.push_str(&conn.join(" "));
        out.push('\n');
    }
    out.push_str(&format!("boundary {}\n", mesh.boundary.len()));
    for &b in &mesh.boundary {
        out.push_str(&format!("{}\n", b));
    }
    out
}

pub fn write_mesh(path: &Path, mesh: &Mesh) -> Result<()> {
    std::fs::write(path, format_mesh(mesh))?;
    Ok(())
}

pub fn parse_field(text: &str, mesh: &Arc<Mesh>) -> Result<DiscreteField> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Config("field file: empty".into()))?;
    let n: usize = header
        .trim()
        .strip_prefix("field n=")
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| {
            Error::Config(format!("field file: bad header '{}', expected 'field n=<count>'", header))
        })?;
    let mut values = Vec::with_capacity(n);
    for line in lines {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        values.push(line.parse().map_err(|_| {
            Error::Config(format!("field file: cannot parse value '{}'", line))
        })?);
    }
    if values.len() != n {
        return Err(Error::Config(format!(
            "field file: header declares {} values, found {}",
            n,
            values.len()
        )));
    }
    DiscreteField::from_values(mesh, values)
}

pub fn read_field(path: &Path, mesh: &Arc<Mesh>) -> Result<DiscreteField> {
    parse_field(&std::fs::read_to_string(path)?, mesh)
}

pub fn format_field(field: &DiscreteField) -> String {
    let mut out = format!("field n={}\n", field.values.len());
    for v in &field.values {
        out.push_str(&format!("{:.17e}\n", v));
    }
    out
}

pub fn write_field(path: &Path, field: &DiscreteField) -> Result<()> {
    std::fs::write(path, format_field(field))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::mesh::BoxDomain;

    #[test]
    fn mesh_round_trip() {
        let mesh = Mesh::uniform(BoxDomain::unit_square(), &[2, 3]).unwrap();
        let text = format_mesh(&mesh);
        let back = parse_mesh(&text).unwrap();
        assert_eq!(back.dim, mesh.dim);
        assert_eq!(back.nodes, mesh.nodes);
        assert_eq!(back.elements, mesh.elements);
        assert_eq!(back.boundary, mesh.boundary);
    }

    #[test]
    fn mesh_comments_allowed() {
        let text = "# a tiny interval\ndim 1\nnodes 3\n0.0\n0.5 # midpoint\n1.0\nelements 2\n0 1\n1 2\nboundary 2\n0\n2\n";
        let mesh = parse_mesh(text).unwrap();
        assert_eq!(mesh.n_nodes(), 3);
        assert_eq!(mesh.n_elements(), 2);
    }

    #[test]
    fn field_round_trip() {
        let mesh = Arc::new(Mesh::uniform(BoxDomain::unit_interval(), &[4]).unwrap());
        let field = DiscreteField::from_fn(&mesh, |x| x[0] * x[0]);
        let back = parse_field(&format_field(&field), &mesh).unwrap();
        assert_eq!(back.values, field.values);
    }

    #[test]
    fn field_header_mismatch_rejected() {
        let mesh = Arc::new(Mesh::uniform(BoxDomain::unit_interval(), &[4]).unwrap());
        assert!(parse_field("field n=5\n1.0\n2.0\n", &mesh).is_err());
    }
}
