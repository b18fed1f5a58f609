/// Wrap definitions, condition statements and labelled query expressions
/// into a runnable program with a `model` function and an `Infer` line.
///
/// Conditions are emitted verbatim, one statement each, so the result
/// contains every condition and query text unchanged.
pub fn assemble_model(defs: &str, conditions: &[String], queries: &[(String, String)]) -> String {
    let mut out = String::new();
    let defs = defs.trim_end();
    if !defs.is_empty() {
        out.push_str(defs);
        out.push_str("\n\n");
    }
    out.push_str("var model = function() {\n");
    for c in conditions {
        out.push_str("  ");
        out.push_str(c.trim().trim_end_matches(';'));
        out.push_str(";\n");
    }
    out.push_str("  return {\n");
    for (label, q) in queries {
        out.push_str(&format!("    {label}: {},\n", q.trim().trim_end_matches(';')));
    }
    out.push_str("  };\n};\n\nvar posterior = Infer({model: model, method: 'rejection'});\n");
    out
}
