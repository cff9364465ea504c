//! Text, CSV and table output of price reports.

use crate::error::{Error, Result};

use super::PriceReport;

/// Fixed-point text without a sign on values that round to zero.
fn fixed(v: f64, dp: usize) -> String {
    let s = format!("{v:.dp$}");
    if s.trim_start_matches('-').chars().all(|c| c == '0' || c == '.') {
        s.trim_start_matches('-').to_string()
    } else {
        s
    }
}

fn price_headers(r: &PriceReport) -> Vec<String> {
    let single = r.buses.len() <= 1;
    let mut out = Vec::new();
    for t in 0..r.prices.len() {
        for b in &r.buses {
            out.push(if single { format!("pi{}", t + 1) } else { format!("pi{}@{b}", t + 1) });
        }
    }
    if let Some(rho) = &r.reserve_prices {
        out.extend((0..rho.len()).map(|t| format!("rho{}", t + 1)));
    }
    out
}

fn price_cells(r: &PriceReport) -> Vec<String> {
    let mut out: Vec<String> = r.prices.iter().flatten().map(|p| fixed(*p, 1)).collect();
    if let Some(rho) = &r.reserve_prices {
        out.extend(rho.iter().map(|p| fixed(*p, 1)));
    }
    out
}

fn render(header: Vec<String>, rows: Vec<Vec<String>>) -> String {
    let mut width: Vec<usize> = header.iter().map(String::len).collect();
    for row in &rows {
        for (k, c) in row.iter().enumerate() {
            width[k] = width[k].max(c.len());
        }
    }
    let line = |cells: &[String]| {
        let mut s = String::new();
        for (k, c) in cells.iter().enumerate() {
            if k == 0 {
                s.push_str(&format!("{c:<w$}", w = width[0]));
            } else {
                s.push_str(&format!("  {c:>w$}", w = width[k]));
            }
        }
        s.push('\n');
        s
    };
    let mut out = line(&header);
    out.push_str(&"-".repeat(width.iter().sum::<usize>() + 2 * (width.len() - 1)));
    out.push('\n');
    for row in &rows {
        out.push_str(&line(row));
    }
    out
}

/// One row per scheme: prices, uplift per unit and the dual diagnostics.
/// Every number is a field of the reports, rounded for display.
pub fn comparison_table(reports: &[PriceReport]) -> String {
    let Some(first) = reports.first() else { return String::new() };
    let mut header = vec!["scheme".to_string()];
    header.extend(price_headers(first));
    header.extend(first.per_unit.iter().map(|u| format!("U[{}]", u.id)));
    for h in ["total U", "v(d)", "dual obj", "gap", "gap rel"] {
        header.push(h.to_string());
    }
    let rows = reports
        .iter()
        .map(|r| {
            let mut row = vec![r.scheme.clone()];
            row.extend(price_cells(r));
            row.extend(r.per_unit.iter().map(|u| u.uplift.map_or("-".to_string(), |v| fixed(v, 2))));
            let t = &r.totals;
            row.push(fixed(t.total_uplift, 2));
            row.push(fixed(t.v_d, 2));
            row.push(fixed(t.dual_obj, 2));
            row.push(fixed(t.gap_abs, 2));
            row.push(fixed(t.gap_rel, 6));
            row
        })
        .collect();
    render(header, rows)
}

/// Prices of one report followed by its per-unit settlement.
pub fn report_table(r: &PriceReport) -> String {
    let mut out = format!("{}\n", r.scheme);
    out.push_str(&render(price_headers(r), vec![price_cells(r)]));
    out.push('\n');
    let header = ["unit", "w", "realized", "uplift"].map(String::from).to_vec();
    let rows = r
        .per_unit
        .iter()
        .map(|u| {
            vec![
                u.id.clone(),
                fixed(u.w, 2),
                fixed(u.realized_profit, 2),
                u.uplift.map_or("-".to_string(), |v| fixed(v, 2)),
            ]
        })
        .collect();
    out.push_str(&render(header, rows));
    let t = &r.totals;
    out.push_str(&format!(
        "\ntotal uplift {}\nv(d) {}\ndual obj {}\ngap {} ({})\n",
        fixed(t.total_uplift, 2),
        fixed(t.v_d, 2),
        fixed(t.dual_obj, 2),
        fixed(t.gap_abs, 2),
        fixed(t.gap_rel, 6)
    ));
    out
}

/// `period,bus,price` rows with 1-based periods.
pub fn prices_csv(r: &PriceReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::Model(format!("csv output: {e}"));
    w.write_record(["period", "bus", "price"]).map_err(csv_err)?;
    for (t, row) in r.prices.iter().enumerate() {
        for (b, p) in row.iter().enumerate() {
            let bus = r.buses.get(b).cloned().unwrap_or_default();
            w.write_record([(t + 1).to_string(), bus, p.to_string()]).map_err(csv_err)?;
        }
    }
    let bytes = w.into_inner().map_err(|e| Error::Model(format!("csv output: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[cfg(test)]
mod tests {
    use super::fixed;

    #[test]
    fn negative_zero_is_unsigned() {
        assert_eq!(fixed(-0.001, 2), "0.00");
        assert_eq!(fixed(-0.01, 2), "-0.01");
        assert_eq!(fixed(65.6, 1), "65.6");
    }
}
