//! Minimal JSON emitter with deterministic output: keys in insertion
//! order and floats printed with 17 significant digits, so identical
//! runs produce byte-identical files.

/// 17 significant digits in scientific notation; round-trips any f64.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn fmt_string(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// JSON object builder that keeps key insertion order.
#[derive(Default)]
pub struct JsonObject {
    fields: Vec<(String, String)>,
}

impl JsonObject {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn raw(mut self, key: &str, value: String) -> Self {
        self.fields.push((key.to_string(), value));
        self
    }

    pub fn string(self, key: &str, value: &str) -> Self {
        let v = fmt_string(value);
        self.raw(key, v)
    }

    pub fn float(self, key: &str, value: f64) -> Self {
        let v = fmt_f64(value);
        self.raw(key, v)
    }

    pub fn int(self, key: &str, value: u64) -> Self {
        self.raw(key, value.to_string())
    }

    pub fn bool(self, key: &str, value: bool) -> Self {
        self.raw(key, value.to_string())
    }

    pub fn float_array(self, key: &str, values: &[f64]) -> Self {
        let items: Vec<String> = values.iter().map(|&x| fmt_f64(x)).collect();
        let v = format!("[{}]", items.join(","));
        self.raw(key, v)
    }

    pub fn finish(self) -> String {
        let items: Vec<String> = self
            .fields
            .into_iter()
            .map(|(k, v)| format!("{}:{}", fmt_string(&k), v))
            .collect();
        format!("{{{}}}", items.join(","))
    }
}

/// Pretty-enough array: one element per line for diffability.
pub fn json_array(items: Vec<String>) -> String {
    if items.is_empty() {
        return "[]".to_string();
    }
    format!("[\n{}\n]", items.join(",\n"))
}
