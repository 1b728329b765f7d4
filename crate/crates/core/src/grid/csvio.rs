use super::{Axis, Grid, SampledFunction};
use crate::error::{Error, Result};
use num_complex::Complex64;
use std::io::{Read, Write};
use std::path::Path;

/// Writes `coord..,re,im` rows with 15 significant digits after the point.
///
/// `coord_names` names the coordinate columns; when empty they default to
/// `coord1`, `coord2`.
pub fn write_csv_to<W: Write>(writer: W, f: &SampledFunction, coord_names: &[&str]) -> Result<()> {
    let dim = f.grid().dim();
    let mut header: Vec<String> = (0..dim)
        .map(|k| {
            coord_names
                .get(k)
                .map_or_else(|| format!("coord{}", k + 1), |s| s.to_string())
        })
        .collect();
    header.push("re".into());
    header.push("im".into());
    let mut out = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(writer);
    out.write_record(&header)?;
    for (flat, v) in f.values().iter().enumerate() {
        let mut row: Vec<String> = f
            .grid()
            .point(flat)
            .into_iter()
            .map(|x| format!("{x:.15e}"))
            .collect();
        row.push(format!("{:.15e}", v.re));
        row.push(format!("{:.15e}", v.im));
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_csv(path: impl AsRef<Path>, f: &SampledFunction, coord_names: &[&str]) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_csv_to(std::io::BufWriter::new(file), f, coord_names)
}

pub fn read_csv(path: impl AsRef<Path>) -> Result<SampledFunction> {
    read_csv_from(std::fs::File::open(path)?)
}

/// Reads the format written by [`write_csv_to`]. The grid is recovered from
/// the coordinate columns; log-uniform positive columns become half-line axes.
pub fn read_csv_from<R: Read>(reader: R) -> Result<SampledFunction> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let width = rdr.headers()?.len();
    if !(3..=4).contains(&width) {
        return Err(Error::Config(format!(
            "sampled-function CSV needs 3 or 4 columns, got {width}"
        )));
    }
    let dim = width - 2;
    let mut coords: Vec<Vec<f64>> = vec![Vec::new(); dim];
    let mut values = Vec::new();
    for (line, record) in rdr.records().enumerate() {
        let record = record?;
        let mut nums = Vec::with_capacity(width);
        for field in record.iter() {
            nums.push(field.parse::<f64>().map_err(|e| {
                Error::Config(format!("row {}: cannot parse '{field}': {e}", line + 2))
            })?);
        }
        for k in 0..dim {
            coords[k].push(nums[k]);
        }
        values.push(Complex64::new(nums[dim], nums[dim + 1]));
    }
    let axes = match dim {
        1 => vec![infer_axis(&coords[0])?],
        _ => {
            let n1 = coords[0].iter().take_while(|&&c| c == coords[0][0]).count();
            if n1 == 0 || values.len() % n1 != 0 {
                return Err(Error::InvalidGrid("rows do not form a rectangular grid".into()));
            }
            let n0 = values.len() / n1;
            let first: Vec<f64> = (0..n0).map(|i| coords[0][i * n1]).collect();
            let second: Vec<f64> = coords[1][..n1].to_vec();
            for i in 0..n0 {
                for j in 0..n1 {
                    let r = i * n1 + j;
                    if coords[0][r] != first[i] || coords[1][r] != second[j] {
                        return Err(Error::InvalidGrid(format!(
                            "row {} breaks the row-major grid layout",
                            r + 2
                        )));
                    }
                }
            }
            vec![infer_axis(&first)?, infer_axis(&second)?]
        }
    };
    SampledFunction::new(Grid::new(axes)?, values)
}

fn infer_axis(c: &[f64]) -> Result<Axis> {
    if c.len() < 2 {
        return Err(Error::InvalidGrid("axis needs at least 2 distinct points".into()));
    }
    let n = c.len();
    let uniform = Axis::uniform(c[0], c[n - 1], n)?;
    let tol = 1e-9;
    let fits = |axis: &Axis| {
        c.iter().enumerate().all(|(i, &x)| {
            let y = axis.coordinate(i);
            (x - y).abs() <= tol * (1.0 + y.abs()) + tol * axis.step().abs()
        })
    };
    if fits(&uniform) {
        return Ok(uniform);
    }
    if c[0] > 0.0 {
        let half = Axis::half_line(c[0], c[n - 1], n)?;
        if c.iter()
            .enumerate()
            .all(|(i, &x)| (x / half.coordinate(i) - 1.0).abs() <= tol)
        {
            return Ok(half);
        }
    }
    Err(Error::InvalidGrid(
        "coordinates are neither uniform nor log-uniform".into(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_through_text() {
        let f = SampledFunction::from_fn(Grid::uniform(-1.0, 1.0, 5).unwrap(), |x| {
            Complex64::new(x[0], -2.0 * x[0])
        })
        .unwrap();
        let mut buf = Vec::new();
        write_csv_to(&mut buf, &f, &["s"]).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("s,re,im\n"));
        assert!(!text.contains('\r'));
        let back = read_csv_from(buf.as_slice()).unwrap();
        assert!(back.distance_linf(&f).unwrap() < 1e-14);
    }

    #[test]
    fn half_line_and_two_dimensional_layouts() {
        let f = SampledFunction::from_real_fn(Grid::half_line(1e-3, 1e3, 13).unwrap(), |x| x[0].ln()).unwrap();
        let mut buf = Vec::new();
        write_csv_to(&mut buf, &f, &[]).unwrap();
        let back = read_csv_from(buf.as_slice()).unwrap();
        assert!(back.grid().axis(0).half_line);

        let g = Grid::new(vec![
            Axis::uniform(0.0, 1.0, 3).unwrap(),
            Axis::uniform(-2.0, 2.0, 5).unwrap(),
        ])
        .unwrap();
        let f = SampledFunction::from_real_fn(g, |x| x[0] + x[1]).unwrap();
        let mut buf = Vec::new();
        write_csv_to(&mut buf, &f, &[]).unwrap();
        assert!(String::from_utf8_lossy(&buf).starts_with("coord1,coord2,re,im"));
        let back = read_csv_from(buf.as_slice()).unwrap();
        assert_eq!(back.grid().axis(1).count, 5);
        assert!(back.distance_linf(&f).unwrap() < 1e-14);
    }

    #[test]
    fn malformed_input() {
        assert!(read_csv_from("x,re,im\n0,1,0\n1,zz,0\n".as_bytes()).is_err());
        assert!(read_csv_from("x,re,im\n0,1,0\n1,1,0\n5,1,0\n".as_bytes()).is_err());
        assert!(read_csv_from("re,im\n1,0\n".as_bytes()).is_err());
    }
}
