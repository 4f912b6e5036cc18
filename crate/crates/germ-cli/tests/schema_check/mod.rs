//! Minimal JSON-Schema checker covering the keyword subset used by the
//! shipped report schema: type, const, enum, required, properties,
//! additionalProperties, items, oneOf, minimum.

use serde_json::Value;

pub fn validate(schema: &Value, value: &Value) -> Result<(), String> {
    check(schema, value, "$")
}

fn check(schema: &Value, value: &Value, path: &str) -> Result<(), String> {
    let obj = match schema.as_object() {
        Some(o) => o,
        None => return Ok(()),
    };
    if let Some(expected) = obj.get("const") {
        if expected != value {
            return Err(format!("{path}: expected const {expected}, got {value}"));
        }
    }
    if let Some(options) = obj.get("enum").and_then(Value::as_array) {
        if !options.contains(value) {
            return Err(format!("{path}: {value} not in enum"));
        }
    }
    if let Some(variants) = obj.get("oneOf").and_then(Value::as_array) {
        let hits = variants
            .iter()
            .filter(|v| check(v, value, path).is_ok())
            .count();
        if hits != 1 {
            return Err(format!(
                "{path}: matched {hits} oneOf variants (need exactly 1)"
            ));
        }
    }
    if let Some(t) = obj.get("type").and_then(Value::as_str) {
        let ok = match t {
            "object" => value.is_object(),
            "array" => value.is_array(),
            "string" => value.is_string(),
            "integer" => value.as_i64().is_some() || value.as_u64().is_some(),
            "number" => value.is_number(),
            "boolean" => value.is_boolean(),
            "null" => value.is_null(),
            other => return Err(format!("{path}: unsupported type keyword '{other}'")),
        };
        if !ok {
            return Err(format!("{path}: expected type {t}, got {value}"));
        }
    }
    if let Some(min) = obj.get("minimum").and_then(Value::as_i64) {
        if let Some(v) = value.as_i64() {
            if v < min {
                return Err(format!("{path}: {v} below minimum {min}"));
            }
        }
    }
    if let Some(required) = obj.get("required").and_then(Value::as_array) {
        if let Some(map) = value.as_object() {
            for key in required.iter().filter_map(Value::as_str) {
                if !map.contains_key(key) {
                    return Err(format!("{path}: missing required field '{key}'"));
                }
            }
        }
    }
    if let Some(props) = obj.get("properties").and_then(Value::as_object) {
        if let Some(map) = value.as_object() {
            for (key, sub) in props {
                if let Some(v) = map.get(key) {
                    check(sub, v, &format!("{path}.{key}"))?;
                }
            }
        }
    }
    if let Some(extra) = obj.get("additionalProperties") {
        if extra.is_object() {
            if let Some(map) = value.as_object() {
                let named: Vec<&str> = obj
                    .get("properties")
                    .and_then(Value::as_object)
                    .map(|p| p.keys().map(String::as_str).collect())
                    .unwrap_or_default();
                for (key, v) in map {
                    if !named.contains(&key.as_str()) {
                        check(extra, v, &format!("{path}.{key}"))?;
                    }
                }
            }
        }
    }
    if let Some(items) = obj.get("items") {
        if let Some(arr) = value.as_array() {
            for (i, v) in arr.iter().enumerate() {
                check(items, v, &format!("{path}[{i}]"))?;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
#[test]
fn checker_smoke() {
    let schema: Value = serde_json::json!({
        "type": "object",
        "required": ["a"],
        "properties": {"a": {"type": "integer", "minimum": 2}}
    });
    assert!(validate(&schema, &serde_json::json!({"a": 3})).is_ok());
    assert!(validate(&schema, &serde_json::json!({"a": 1})).is_err());
    assert!(validate(&schema, &serde_json::json!({})).is_err());
}
