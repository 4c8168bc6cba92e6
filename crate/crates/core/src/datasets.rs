//! Bundled data sets.

use crate::linalg::Matrix;
use crate::moments::DataMatrix;

const IRIS_CSV: &str = include_str!("../data/iris.csv");

/// Anderson's iris measurements as published by Fisher: 150 flowers, four
/// variables in centimeters (sepal length, sepal width, petal length, petal
/// width). Species labels are not included.
pub fn iris() -> DataMatrix {
    let mut lines = IRIS_CSV.lines();
    let names: Vec<String> = lines
        .next()
        .expect("iris header")
        .split(',')
        .map(str::to_owned)
        .collect();
    let rows: Vec<Vec<f64>> = lines
        .filter(|l| !l.is_empty())
        .map(|l| {
            l.split(',')
                .map(|c| c.parse().expect("iris cell"))
                .collect()
        })
        .collect();
    let values = Matrix::from_fn(rows.len(), names.len(), |i, j| rows[i][j]);
    DataMatrix::new(values)
        .and_then(|x| x.with_column_names(names))
        .expect("bundled iris data is valid")
}

/// The raw CSV text of [`iris`].
pub fn iris_csv() -> &'static str {
    IRIS_CSV
}
