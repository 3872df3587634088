//! Static SVG heatmaps from matrix CSV files: one shaded square per
//! cell, labels along both axes, no scripting. Output is byte-stable
//! for fixed input.

use taxosim_core::bench::format_value;

#[derive(Debug)]
pub struct MatrixData {
    pub labels: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

/// Parse the square CSV layout the benchmark writes: a corner cell plus
/// column labels in the header, then one labeled row per line.
pub fn parse_matrix_csv(text: &str) -> Result<MatrixData, String> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    let Some((_, header)) = lines.next() else {
        return Err("matrix file is empty".to_owned());
    };
    let labels: Vec<String> = header.split(',').skip(1).map(str::to_owned).collect();
    if labels.is_empty() {
        return Err("header row has no column labels".to_owned());
    }

    let mut rows = Vec::with_capacity(labels.len());
    for (idx, line) in lines {
        let mut cells = line.split(',');
        cells.next(); // row label
        let row: Vec<f64> = cells
            .map(|c| {
                c.trim()
                    .parse::<f64>()
                    .map_err(|_| format!("line {}: {c:?} is not a number", idx + 1))
            })
            .collect::<Result<_, _>>()?;
        if row.len() != labels.len() {
            return Err(format!(
                "line {}: expected {} values, found {}",
                idx + 1,
                labels.len(),
                row.len()
            ));
        }
        rows.push(row);
    }
    if rows.len() != labels.len() {
        return Err(format!(
            "expected {} rows to match the header, found {}",
            labels.len(),
            rows.len()
        ));
    }
    Ok(MatrixData { labels, rows })
}

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            _ => out.push(c),
        }
    }
    out
}

/// Linear white-to-blue ramp; the cell with the smallest value stays
/// near-white, the largest goes dark.
fn color(t: f64) -> String {
    let lerp = |a: f64, b: f64| (a + t.clamp(0.0, 1.0) * (b - a)).round() as u8;
    format!(
        "rgb({},{},{})",
        lerp(247.0, 8.0),
        lerp(251.0, 48.0),
        lerp(255.0, 107.0)
    )
}

pub fn render_svg(m: &MatrixData, cell: u32) -> String {
    let n = m.labels.len();
    let cell = cell as usize;
    let longest = m.labels.iter().map(String::len).max().unwrap_or(0);
    let margin = 10 + 7 * longest;
    let width = margin + n * cell + 10;
    let height = margin + n * cell + 10;

    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for v in m.rows.iter().flatten() {
        min = min.min(*v);
        max = max.max(*v);
    }
    let span = max - min;

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" \
         font-family=\"monospace\" font-size=\"10\">\n"
    ));
    for (j, label) in m.labels.iter().enumerate() {
        let cx = margin + j * cell + cell / 2;
        let cy = margin - 4;
        svg.push_str(&format!(
            "  <text x=\"{cx}\" y=\"{cy}\" transform=\"rotate(-45 {cx} {cy})\">{}</text>\n",
            escape(label)
        ));
    }
    for (i, label) in m.labels.iter().enumerate() {
        let y = margin + i * cell + (cell * 7) / 10;
        svg.push_str(&format!(
            "  <text x=\"{}\" y=\"{y}\" text-anchor=\"end\">{}</text>\n",
            margin - 4,
            escape(label)
        ));
    }
    for (i, row) in m.rows.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            let t = if span == 0.0 { 0.5 } else { (v - min) / span };
            svg.push_str(&format!(
                "  <rect x=\"{}\" y=\"{}\" width=\"{cell}\" height=\"{cell}\" fill=\"{}\">\
                 <title>{},{} = {}</title></rect>\n",
                margin + j * cell,
                margin + i * cell,
                color(t),
                escape(&m.labels[i]),
                escape(&m.labels[j]),
                format_value(v)
            ));
        }
    }
    svg.push_str("</svg>\n");
    svg
}
