use ecshor_wasm::*;

#[test]
fn pmf_sums_to_one() {
    let v = peak_pmf_values(10.5, 6).unwrap();
    assert_eq!(v.len(), 64);
    assert!((v.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    assert!((v[10] - v[11]).abs() < 1e-15);
    assert!(peak_pmf_values(1.0, 0).is_err());
    assert!(peak_pmf_values(f64::NAN, 4).is_err());
}

#[test]
fn centers_wrap_around() {
    assert_eq!(peak_pmf_values(-1.0, 4).unwrap(), peak_pmf_values(15.0, 4).unwrap());
}

#[test]
fn success_curve_is_increasing() {
    let c = success_curve_values(101, 37, 0, 7, 10).unwrap();
    assert_eq!(c.len(), 4);
    assert!(c.windows(2).all(|w| w[1] > w[0]));
    assert!(success_curve_values(8191, 1, 0, 13, 14).is_err());
    assert!(success_curve_values(100, 1, 0, 7, 8).is_err());
}

#[test]
fn trace_of_worked_example() {
    let s = euclid_trace_json("257", "96", true).unwrap();
    let v: serde_json::Value = serde_json::from_str(&s).unwrap();
    assert_eq!(v["inverse"], "83");
    assert_eq!(v["cycles_used"], 29);
    let q: Vec<&str> = v["quotients"].as_array().unwrap().iter().map(|q| q.as_str().unwrap()).collect();
    assert_eq!(q, ["2", "1", "2", "10", "3"]);
    assert!(!v["rows"].as_array().unwrap().is_empty());
    assert!(euclid_trace_json("4", "2", true).is_err());
    assert!(euclid_trace_json("x", "2", true).is_err());
}
