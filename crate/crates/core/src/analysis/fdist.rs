use statrs::function::beta::checked_beta_reg;

/// Upper tail probability of the F(df1, df2) distribution at `f`, via the
/// regularized incomplete beta function.
pub fn f_upper_tail(f: f64, df1: f64, df2: f64) -> f64 {
    assert!(df1 > 0.0 && df2 > 0.0, "degrees of freedom must be positive");
    if f.is_nan() {
        return f64::NAN;
    }
    if f <= 0.0 {
        return 1.0;
    }
    if f.is_infinite() {
        return 0.0;
    }
    let x = df2 / (df2 + df1 * f);
    checked_beta_reg(df2 / 2.0, df1 / 2.0, x)
        .expect("beta_reg arguments in domain")
        .clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_statistic_has_unit_p() {
        assert_eq!(f_upper_tail(0.0, 1.0, 72.0), 1.0);
    }

    #[test]
    fn equal_df_median_is_one() {
        // F(d, d) is symmetric under reciprocal, so its median is exactly 1.
        for d in [1.0, 2.0, 5.0, 30.0, 72.0] {
            assert!((f_upper_tail(1.0, d, d) - 0.5).abs() < 1e-12, "d = {d}");
        }
    }

    #[test]
    fn df2_two_has_closed_form() {
        // For df1 = 2: p = (1 + 2F/df2)^(-df2/2).
        for (f, d2) in [(0.5, 4.0), (3.0, 10.0), (7.5, 63.0)] {
            let oracle = (1.0f64 + 2.0 * f / d2).powf(-d2 / 2.0);
            assert!((f_upper_tail(f, 2.0, d2) - oracle).abs() < 1e-12);
        }
    }

    #[test]
    fn monotone_decreasing() {
        let mut prev = 1.0;
        for i in 1..200 {
            let p = f_upper_tail(i as f64 * 0.1, 1.0, 72.0);
            assert!(p < prev);
            prev = p;
        }
    }
}
