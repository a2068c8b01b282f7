//! CSV formats: graphs `theta,branch,value`; tubes `theta,branch,side,value`
//! with `side` in `{lo, hi}`. Rows ascend in `θ`, then branch (then `lo`
//! before `hi`). Floats use the shortest round-tripping representation.

use std::io::{BufRead, Write};

use super::{MultiGraph, Tube};
use crate::error::{Error, Result};

pub fn write_graph_csv<W: Write>(g: &MultiGraph, mut w: W) -> Result<()> {
    writeln!(w, "theta,branch,value")?;
    for j in 0..g.grid_size() {
        let th = g.theta(j);
        for (b, v) in g.fibre(j).iter().enumerate() {
            writeln!(w, "{th},{b},{v}")?;
        }
    }
    Ok(())
}

pub fn write_tube_csv<W: Write>(t: &Tube, mut w: W) -> Result<()> {
    writeln!(w, "theta,branch,side,value")?;
    let m = t.grid_size();
    for j in 0..m {
        let th = j as f64 / m as f64;
        for (b, (lo, hi)) in t.intervals(j).into_iter().enumerate() {
            writeln!(w, "{th},{b},lo,{lo}")?;
            writeln!(w, "{th},{b},hi,{hi}")?;
        }
    }
    Ok(())
}

fn parse_f64(field: &str, line: usize) -> Result<f64> {
    field.trim().parse().map_err(|_| Error::Config {
        line,
        detail: format!("not a number: `{field}`"),
    })
}

/// Rows grouped by `θ` (in file order) as `(fields after theta)`.
fn read_rows<R: BufRead>(r: R, header: &str, width: usize) -> Result<Vec<Vec<Vec<String>>>> {
    let mut lines = r.lines();
    let first = lines.next().transpose()?.unwrap_or_default();
    if first.trim() != header {
        return Err(Error::Config {
            line: 1,
            detail: format!("expected header `{header}`"),
        });
    }
    let mut fibres: Vec<Vec<Vec<String>>> = Vec::new();
    let mut last_theta: Option<f64> = None;
    for (i, line) in lines.enumerate() {
        let line_no = i + 2;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != width {
            return Err(Error::Config {
                line: line_no,
                detail: format!("expected {width} fields"),
            });
        }
        let th = parse_f64(fields[0], line_no)?;
        match last_theta {
            Some(prev) if prev == th => {}
            Some(prev) if th < prev => {
                return Err(Error::Config {
                    line: line_no,
                    detail: "theta must ascend".into(),
                })
            }
            _ => fibres.push(Vec::new()),
        }
        last_theta = Some(th);
        fibres
            .last_mut()
            .expect("pushed above")
            .push(fields[1..].iter().map(|s| s.trim().to_string()).collect());
    }
    Ok(fibres)
}

pub fn read_graph_csv<R: BufRead>(r: R) -> Result<MultiGraph> {
    let fibres = read_rows(r, "theta,branch,value", 3)?;
    let values = fibres
        .into_iter()
        .map(|rows| rows.iter().map(|f| parse_f64(&f[1], 0)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    MultiGraph::new(values)
}

pub fn read_tube_csv<R: BufRead>(r: R, p: usize, q: usize) -> Result<Tube> {
    let fibres = read_rows(r, "theta,branch,side,value", 4)?;
    let mut out = Vec::with_capacity(fibres.len());
    for rows in fibres {
        let mut lo: Vec<Option<f64>> = Vec::new();
        let mut hi: Vec<Option<f64>> = Vec::new();
        for f in rows {
            let b: usize = f[0].parse().map_err(|_| Error::Config {
                line: 0,
                detail: format!("bad branch index `{}`", f[0]),
            })?;
            let v = parse_f64(&f[2], 0)?;
            if lo.len() <= b {
                lo.resize(b + 1, None);
                hi.resize(b + 1, None);
            }
            let slot = match f[1].as_str() {
                "lo" => &mut lo[b],
                "hi" => &mut hi[b],
                other => {
                    return Err(Error::Config {
                        line: 0,
                        detail: format!("side must be lo or hi, got `{other}`"),
                    })
                }
            };
            if slot.replace(v).is_some() {
                return Err(Error::Config {
                    line: 0,
                    detail: format!("duplicate {} for branch {b}", f[1]),
                });
            }
        }
        let fibre = lo
            .into_iter()
            .zip(hi)
            .map(|(l, h)| match (l, h) {
                (Some(l), Some(h)) => Ok((l, h)),
                _ => Err(Error::Config {
                    line: 0,
                    detail: "branch missing lo or hi".into(),
                }),
            })
            .collect::<Result<Vec<_>>>()?;
        out.push(fibre);
    }
    Tube::new(p, q, out)
}

#[cfg(test)]
mod tests {
    use super::super::fig1_graph;
    use super::*;

    #[test]
    fn graph_round_trip() {
        let g = fig1_graph(32).unwrap();
        let mut buf = Vec::new();
        write_graph_csv(&g, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("theta,branch,value\n0,0,0\n"));
        let back = read_graph_csv(&buf[..]).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn tube_round_trip() {
        let g = fig1_graph(16).unwrap();
        let t = Tube::around(&g, 2, 2, |th| 0.01 + 0.01 * th).unwrap();
        let mut buf = Vec::new();
        write_tube_csv(&t, &mut buf).unwrap();
        let back = read_tube_csv(&buf[..], 2, 2).unwrap();
        for j in 0..16 {
            for (a, b) in back.intervals(j).iter().zip(t.intervals(j)) {
                assert!((a.0 - b.0).abs() < 1e-15 && (a.1 - b.1).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn malformed_csv() {
        assert!(read_graph_csv("theta,value\n".as_bytes()).is_err());
        assert!(read_graph_csv("theta,branch,value\n0,0,x\n0.5,0,0.1\n".as_bytes()).is_err());
        assert!(read_graph_csv("theta,branch,value\n0.5,0,0.1\n0,0,0.1\n".as_bytes()).is_err());
        let bad_side = "theta,branch,side,value\n0,0,mid,0.1\n";
        assert!(read_tube_csv(bad_side.as_bytes(), 1, 1).is_err());
    }
}
