//! Feature CSV: header `f0,...,f{D-1},label[,factor]`.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use ndarray::Array2;

use super::{DataError, Dataset, DatasetMeta};

pub fn write_feature_csv<W: Write>(data: &Dataset, out: W) -> Result<(), DataError> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = (0..data.dim()).map(|j| format!("f{j}")).collect();
    header.push("label".into());
    if data.factors.is_some() {
        header.push("factor".into());
    }
    w.write_record(&header).map_err(csv_err)?;
    for (i, row) in data.features.rows().into_iter().enumerate() {
        let mut rec: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
        rec.push(data.labels[i].to_string());
        if let Some(f) = &data.factors {
            rec.push(format!("{}", f[i]));
        }
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> DataError {
    let line = e.position().map_or(0, |p| p.line());
    DataError::Parse {
        line,
        message: e.to_string(),
    }
}

pub fn read_feature_csv<R: Read>(input: R, name: &str) -> Result<Dataset, DataError> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let header = r.headers().map_err(csv_err)?.clone();
    if header.is_empty() || (header.len() == 1 && header[0].is_empty()) {
        return Err(DataError::Empty);
    }
    let mut dim = 0;
    while header.get(dim) == Some(&format!("f{dim}")) {
        dim += 1;
    }
    if dim == 0 {
        return Err(DataError::MissingColumn("f0".into()));
    }
    if header.get(dim) != Some("label") {
        return Err(DataError::MissingColumn("label".into()));
    }
    let has_factor = match header.get(dim + 1) {
        None => false,
        Some("factor") if header.len() == dim + 2 => true,
        Some(other) => {
            return Err(DataError::Parse {
                line: 1,
                message: format!("unexpected column `{other}`"),
            })
        }
    };

    let mut values = Vec::new();
    let mut labels = Vec::new();
    let mut factors = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_err)?;
        let line = rec.position().map_or(0, |p| p.line());
        let cell_err = |col: &str, cell: &str| DataError::Parse {
            line,
            message: format!("column `{col}`: cannot parse `{cell}`"),
        };
        if rec.len() != header.len() {
            return Err(DataError::Parse {
                line,
                message: format!("expected {} fields, found {}", header.len(), rec.len()),
            });
        }
        for j in 0..dim {
            let cell = rec[j].trim();
            values.push(cell.parse::<f64>().map_err(|_| cell_err(&header[j], cell))?);
        }
        let cell = rec[dim].trim();
        labels.push(cell.parse::<usize>().map_err(|_| cell_err("label", cell))?);
        if has_factor {
            let cell = rec[dim + 1].trim();
            factors.push(cell.parse::<f64>().map_err(|_| cell_err("factor", cell))?);
        }
    }
    if labels.is_empty() {
        return Err(DataError::Empty);
    }
    let n = labels.len();
    let classes = labels.iter().copied().max().map_or(0, |m| m + 1);
    Ok(Dataset {
        features: Array2::from_shape_vec((n, dim), values).expect("n × dim values"),
        labels,
        factors: has_factor.then_some(factors),
        meta: DatasetMeta {
            name: name.into(),
            sigma: f64::NAN,
            seed: 0,
            classes,
        },
    })
}

pub fn load_feature_csv(path: &Path) -> Result<Dataset, DataError> {
    let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("csv");
    read_feature_csv(File::open(path)?, name)
}
