//! Gmsh MSH 2.2 ASCII reader and writer for 3-node triangle surfaces.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{Point, SurfaceMesh};
use crate::error::{Error, Result};

const TRIANGLE: u32 = 2;
// Zero-dimensional point elements are tolerated and dropped.
const POINT: u32 = 15;

struct Lines<R> {
    inner: std::io::Lines<BufReader<R>>,
    number: usize,
}

impl<R: Read> Lines<R> {
    fn next_line(&mut self) -> Result<Option<String>> {
        match self.inner.next() {
            None => Ok(None),
            Some(Ok(line)) => {
                self.number += 1;
                Ok(Some(line.trim().to_string()))
            }
            Some(Err(e)) => Err(self.error(format!("read failure: {e}"))),
        }
    }

    fn expect_line(&mut self, what: &str) -> Result<String> {
        self.next_line()?
            .ok_or_else(|| self.error(format!("unexpected end of file, expected {what}")))
    }

    fn error(&self, message: String) -> Error {
        Error::Parse {
            line: self.number,
            message,
        }
    }
}

fn parse<T: std::str::FromStr>(token: Option<&str>, what: &str, line: usize) -> Result<T> {
    let token = token.ok_or_else(|| Error::Parse {
        line,
        message: format!("missing {what}"),
    })?;
    token.parse().map_err(|_| Error::Parse {
        line,
        message: format!("invalid {what} '{token}'"),
    })
}

/// Read an MSH 2.2 ASCII surface mesh.
pub fn read_msh<R: Read>(reader: R) -> Result<SurfaceMesh> {
    let mut lines = Lines {
        inner: BufReader::new(reader).lines(),
        number: 0,
    };
    let mut nodes: Option<(Vec<Point>, HashMap<usize, usize>)> = None;
    let mut triangles: Option<Vec<[usize; 3]>> = None;
    let mut saw_format = false;

    while let Some(line) = lines.next_line()? {
        match line.as_str() {
            "$MeshFormat" => {
                let header = lines.expect_line("format header")?;
                let mut it = header.split_whitespace();
                let version: String = parse(it.next(), "version", lines.number)?;
                let file_type: u32 = parse(it.next(), "file type", lines.number)?;
                if !version.starts_with("2.") {
                    return Err(lines.error(format!("unsupported MSH version {version}")));
                }
                if file_type != 0 {
                    return Err(lines.error("binary MSH files are not supported".into()));
                }
                expect_end(&mut lines, "$EndMeshFormat")?;
                saw_format = true;
            }
            "$Nodes" => {
                let count: usize = parse(Some(&lines.expect_line("node count")?), "node count", lines.number)?;
                let mut coords = Vec::with_capacity(count);
                let mut ids = HashMap::with_capacity(count);
                for _ in 0..count {
                    let row = lines.expect_line("node")?;
                    let n = lines.number;
                    let mut it = row.split_whitespace();
                    let id: usize = parse(it.next(), "node id", n)?;
                    let p = [
                        parse(it.next(), "x coordinate", n)?,
                        parse(it.next(), "y coordinate", n)?,
                        parse(it.next(), "z coordinate", n)?,
                    ];
                    if ids.insert(id, coords.len()).is_some() {
                        return Err(lines.error(format!("duplicate node id {id}")));
                    }
                    coords.push(p);
                }
                expect_end(&mut lines, "$EndNodes")?;
                nodes = Some((coords, ids));
            }
            "$Elements" => {
                let ids = &nodes
                    .as_ref()
                    .ok_or_else(|| lines.error("$Elements before $Nodes".into()))?
                    .1;
                let count: usize =
                    parse(Some(&lines.expect_line("element count")?), "element count", lines.number)?;
                let mut tris = Vec::with_capacity(count);
                for _ in 0..count {
                    let row = lines.expect_line("element")?;
                    let n = lines.number;
                    let mut it = row.split_whitespace();
                    let element_id: usize = parse(it.next(), "element id", n)?;
                    let kind: u32 = parse(it.next(), "element type", n)?;
                    let tags: usize = parse(it.next(), "tag count", n)?;
                    for _ in 0..tags {
                        let _: i64 = parse(it.next(), "tag", n)?;
                    }
                    match kind {
                        TRIANGLE => {
                            let mut t = [0usize; 3];
                            for slot in &mut t {
                                let node: usize = parse(it.next(), "node reference", n)?;
                                *slot = *ids.get(&node).ok_or_else(|| Error::Parse {
                                    line: n,
                                    message: format!("element {element_id} references unknown node {node}"),
                                })?;
                            }
                            tris.push(t);
                        }
                        POINT => {}
                        other => {
                            return Err(Error::UnsupportedElement {
                                element_id,
                                element_type: other as usize,
                            })
                        }
                    }
                }
                expect_end(&mut lines, "$EndElements")?;
                triangles = Some(tris);
            }
            "" => {}
            section if section.starts_with('$') && !section.starts_with("$End") => {
                // Skip sections we do not interpret (physical names, data, ...).
                let end = format!("$End{}", &section[1..]);
                loop {
                    if lines.expect_line(&end)? == end {
                        break;
                    }
                }
            }
            other => return Err(lines.error(format!("unexpected content '{other}'"))),
        }
    }

    if !saw_format {
        return Err(Error::Parse {
            line: lines.number,
            message: "missing $MeshFormat section".into(),
        });
    }
    let (vertices, _) = nodes.ok_or_else(|| lines.error("missing $Nodes section".into()))?;
    let triangles = triangles.ok_or_else(|| lines.error("missing $Elements section".into()))?;
    SurfaceMesh::new(vertices, triangles)
}

fn expect_end<R: Read>(lines: &mut Lines<R>, marker: &str) -> Result<()> {
    let line = lines.expect_line(marker)?;
    if line != marker {
        return Err(lines.error(format!("expected {marker}, found '{line}'")));
    }
    Ok(())
}

/// Write an MSH 2.2 ASCII file. Coordinates use shortest round-trip
/// formatting so reading the file back is bit-exact.
pub fn write_msh<W: Write>(mesh: &SurfaceMesh, writer: W) -> std::io::Result<()> {
    let mut w = BufWriter::new(writer);
    writeln!(w, "$MeshFormat\n2.2 0 8\n$EndMeshFormat")?;
    writeln!(w, "$Nodes\n{}", mesh.vertex_count())?;
    for (i, p) in mesh.vertices().iter().enumerate() {
        writeln!(w, "{} {:?} {:?} {:?}", i + 1, p[0], p[1], p[2])?;
    }
    writeln!(w, "$EndNodes\n$Elements\n{}", mesh.element_count())?;
    for (e, t) in mesh.triangles().iter().enumerate() {
        writeln!(w, "{} 2 2 0 1 {} {} {}", e + 1, t[0] + 1, t[1] + 1, t[2] + 1)?;
    }
    writeln!(w, "$EndElements")?;
    w.flush()
}

pub fn load_msh(path: impl AsRef<Path>) -> Result<SurfaceMesh> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_msh(file)
}

pub fn save_msh(mesh: &SurfaceMesh, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_msh(mesh, file).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::super::{make_cube, make_sphere};
    use super::*;

    fn round_trip(mesh: &SurfaceMesh) -> SurfaceMesh {
        let mut buf = Vec::new();
        write_msh(mesh, &mut buf).unwrap();
        read_msh(buf.as_slice()).unwrap()
    }

    #[test]
    fn cube_round_trip() {
        let mesh = make_cube(0.5).unwrap();
        let back = round_trip(&mesh);
        assert_eq!(back.triangles(), mesh.triangles());
        assert_eq!(back.vertices(), mesh.vertices());
    }

    #[test]
    fn sphere_coordinates_are_bit_exact() {
        let mesh = make_sphere(2).unwrap();
        let back = round_trip(&mesh);
        for (a, b) in mesh.vertices().iter().zip(back.vertices()) {
            for i in 0..3 {
                assert_eq!(a[i].to_bits(), b[i].to_bits());
            }
        }
    }

    const TETRA_NODES: &str = "$MeshFormat\n2.2 0 8\n$EndMeshFormat\n$Nodes\n4\n\
        1 0 0 0\n2 1 0 0\n3 0 1 0\n4 0 0 1\n$EndNodes\n";

    #[test]
    fn reads_a_hand_written_tetrahedron() {
        let text = format!(
            "{TETRA_NODES}$Elements\n5\n1 15 2 0 1 1\n2 2 2 0 1 1 3 2\n\
             3 2 2 0 1 1 2 4\n4 2 2 0 1 1 4 3\n5 2 2 0 1 2 3 4\n$EndElements\n"
        );
        let mesh = read_msh(text.as_bytes()).unwrap();
        assert_eq!(mesh.element_count(), 4);
        assert!((mesh.signed_volume() - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn quadrilateral_is_rejected() {
        let text = format!("{TETRA_NODES}$Elements\n1\n7 3 2 0 1 1 2 3 4\n$EndElements\n");
        match read_msh(text.as_bytes()) {
            Err(Error::UnsupportedElement { element_id, element_type }) => {
                assert_eq!((element_id, element_type), (7, 3));
            }
            other => panic!("expected unsupported element, got {other:?}"),
        }
    }

    #[test]
    fn edge_with_three_triangles_is_rejected() {
        let text = "$MeshFormat\n2.2 0 8\n$EndMeshFormat\n$Nodes\n5\n\
            1 0 0 0\n2 1 0 0\n3 0 1 0\n4 0 -1 0\n5 0 0 1\n$EndNodes\n\
            $Elements\n3\n1 2 0 1 2 3\n2 2 0 2 1 4\n3 2 0 1 2 5\n$EndElements\n";
        assert!(matches!(read_msh(text.as_bytes()), Err(Error::NonManifold(_))));
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let text = "$MeshFormat\n2.2 0 8\n$EndMeshFormat\n$Nodes\n1\n1 0 zero 0\n$EndNodes\n";
        match read_msh(text.as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 6),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cube.msh");
        let mesh = make_cube(1.0).unwrap();
        save_msh(&mesh, &path).unwrap();
        let back = load_msh(&path).unwrap();
        assert_eq!(back.triangles(), mesh.triangles());
        assert!(matches!(load_msh(dir.path().join("missing.msh")), Err(Error::Io { .. })));
    }
}
