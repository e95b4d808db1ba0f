use extendkit_web::{convex_profile_json, set_function_report_json, submodular_check_json};

#[test]
fn profile_matches_roof_inside_and_extends_outside() {
    let doc = r#"{"dim":1,"points":[{"x":["0"],"value":"0"},{"x":["1"],"value":"2"},{"x":["2"],"value":"2"}]}"#;
    let r = convex_profile_json(doc, -1.0, 3.0, 5).unwrap();
    assert_eq!(r["extendible"], false);
    let profile = r["profile"].as_array().unwrap();
    assert_eq!(profile.len(), 5);
    assert!(profile[0]["roof"].is_null());
    assert_eq!(profile[1]["roof"], 0.0);
    assert_eq!(profile[3]["roof"], 2.0);
    assert_eq!(profile[4]["tilde"], 3.0);
    assert!(convex_profile_json(doc, 1.0, 0.0, 5).is_err());
}

#[test]
fn three_element_certificate_is_rewritten() {
    let doc = r#"{"m":3,"points":[{"set":[],"value":"0"},{"set":[0],"value":"0"},{"set":[1,2],"value":"0"},{"set":[0,1,2],"value":"1"}]}"#;
    let r = submodular_check_json(doc).unwrap();
    assert_eq!(r["extendible"], false);
    assert_eq!(r["rewritten_valid"], true);
    assert_eq!(r["slack"], "1");
}

#[test]
fn report_covers_every_class() {
    let doc = r#"{"m":2,"points":[{"set":[0],"value":"1"},{"set":[1],"value":"1"},{"set":[0,1],"value":"3"}]}"#;
    let r = set_function_report_json(doc).unwrap();
    assert_eq!(r["monotone_subadditive"]["extendible"], false);
    assert_eq!(r["xos"]["verdict"], "not_extendible");
    assert_eq!(r["submodular"]["extendible"], true);
    assert_eq!(r["factors"]["monotone_subadditive"], "3/2");
    assert!(set_function_report_json("{}").is_err());
}
