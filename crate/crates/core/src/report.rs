use crate::equilibrium::GammaTable;
use crate::search::ScalingRow;
use crate::welfare::PricingRow;

/// Fixed float formatting for file outputs: 12 significant digits, '.'
/// separator, no locale. Infinite bounds render as "inf"/"-inf".
pub fn fmt_sig(v: f64) -> String {
    const SIG: i32 = 12;
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let mag = v.abs().log10().floor() as i32;
    let text = if !(-4..SIG).contains(&mag) {
        let s = format!("{:.*e}", (SIG - 1) as usize, v);
        // trim trailing zeros in the mantissa: 1.200000000000e3 -> 1.2e3
        match s.split_once('e') {
            Some((mantissa, exp)) => {
                let trimmed = mantissa.trim_end_matches('0').trim_end_matches('.');
                format!("{trimmed}e{exp}")
            }
            None => s,
        }
    } else {
        let decimals = (SIG - 1 - mag).max(0) as usize;
        let s = format!("{v:.decimals$}");
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    };
    text
}

fn opt_f64(v: Option<f64>) -> String {
    v.map(fmt_sig).unwrap_or_default()
}

fn opt_usize(v: Option<usize>) -> String {
    v.map(|u| u.to_string()).unwrap_or_default()
}

pub fn gamma_table_csv(table: &GammaTable) -> String {
    let mut out = String::from("d,x_s,X_s,gamma_lo,gamma_hi\n");
    for iv in &table.intervals {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            iv.d,
            fmt_sig(iv.x_s),
            fmt_sig(iv.big_x_s),
            fmt_sig(iv.gamma_lo),
            fmt_sig(iv.gamma_hi),
        ));
    }
    out
}

pub fn scaling_csv(rows: &[ScalingRow]) -> String {
    let mut out = String::from("n,seed,n_h,fraction,x_hi,x_lo,k_hi,k_lo\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.n,
            r.seed,
            r.n_h,
            fmt_sig(r.fraction),
            fmt_sig(r.x_hi),
            opt_f64(r.x_lo),
            opt_usize(r.k_hi),
            opt_usize(r.k_lo),
        ));
    }
    out
}

pub fn pricing_sweep_csv(rows: &[PricingRow]) -> String {
    let mut out =
        String::from("gamma,d_opt,x_opt,welfare_per_user,p_opt,p_paper,t_lo,t_hi,t_mid\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            fmt_sig(r.gamma),
            r.d_opt,
            fmt_sig(r.x_opt),
            fmt_sig(r.welfare_per_user),
            fmt_sig(r.p_opt),
            fmt_sig(r.p_paper),
            opt_f64(r.t_lo),
            opt_f64(r.t_hi),
            opt_f64(r.t_mid),
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digit_formatting() {
        assert_eq!(fmt_sig(0.0), "0");
        assert_eq!(fmt_sig(9.0), "9");
        assert_eq!(fmt_sig(0.1), "0.1");
        assert_eq!(fmt_sig(f64::INFINITY), "inf");
        assert_eq!(fmt_sig(-0.25), "-0.25");
        assert_eq!(fmt_sig(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_sig(123456.789), "123456.789");
        assert_eq!(fmt_sig(1e-7), "1e-7");
        assert_eq!(fmt_sig(1.5e15), "1.5e15");
        // 12 significant digits, round-half-even on the 13th
        assert_eq!(fmt_sig(9.866251939004663), "9.866251939");
    }
}
