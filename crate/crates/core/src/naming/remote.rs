//! HTTP naming provider.
//!
//! Wire format: `POST {endpoint}` with body
//! `{"model", "identifiers": [...], "kinds": {name: kind}, "context", "forbidden": [...]}`
//! and a JSON reply `{"renames": {old: new}}`. A bearer key is sent when one
//! is configured. Any transport error or non-2xx status is reported as
//! unavailable so the caller can fall back.

use std::collections::{BTreeMap, BTreeSet};
use std::time::Duration;

use serde_json::{json, Value};

use super::{NamingError, NamingProvider, NamingRequest};

pub const REMOTE_TIMEOUT: Duration = Duration::from_secs(10);

pub struct RemoteNamer {
    endpoint: String,
    model: String,
    api_key: Option<String>,
    agent: ureq::Agent,
}

impl RemoteNamer {
    pub fn new(endpoint: &str, model: &str, api_key: Option<String>) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(REMOTE_TIMEOUT))
            .build()
            .new_agent();
        RemoteNamer {
            endpoint: endpoint.to_string(),
            model: model.to_string(),
            api_key,
            agent,
        }
    }

    fn body(&self, requests: &[NamingRequest]) -> Value {
        let mut context = String::new();
        for r in requests {
            if !context.contains(&r.context) {
                context.push_str(&r.context);
            }
        }
        let forbidden: BTreeSet<&String> = requests.iter().flat_map(|r| &r.forbidden).collect();
        let kinds: BTreeMap<&String, _> = requests.iter().map(|r| (&r.identifier, r.kind)).collect();
        json!({
            "model": self.model,
            "identifiers": requests.iter().map(|r| &r.identifier).collect::<Vec<_>>(),
            "kinds": kinds,
            "context": context,
            "forbidden": forbidden,
        })
    }
}

impl NamingProvider for RemoteNamer {
    fn propose(&self, requests: &[NamingRequest]) -> Result<BTreeMap<String, String>, NamingError> {
        let unavailable = |e: ureq::Error| NamingError::Unavailable(e.to_string());
        let mut req = self
            .agent
            .post(&self.endpoint)
            .header("Content-Type", "application/json");
        if let Some(key) = &self.api_key {
            req = req.header("Authorization", &format!("Bearer {key}"));
        }
        let mut resp = req.send(self.body(requests).to_string()).map_err(unavailable)?;
        let text = resp.body_mut().read_to_string().map_err(unavailable)?;
        parse_renames(&text)
    }
}

fn parse_renames(text: &str) -> Result<BTreeMap<String, String>, NamingError> {
    let v: Value = serde_json::from_str(text).map_err(|e| NamingError::Malformed(e.to_string()))?;
    let obj = v
        .get("renames")
        .and_then(Value::as_object)
        .ok_or_else(|| NamingError::Malformed("missing 'renames' object".into()))?;
    Ok(obj
        .iter()
        .filter_map(|(k, v)| v.as_str().map(|s| (k.clone(), s.to_string())))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::NameKind;
    use std::io::{BufRead, BufReader, Read, Write};
    use std::net::TcpListener;
    use std::sync::mpsc;
    use std::thread;

    /// Serves one canned HTTP response per connection and forwards each
    /// request body.
    fn serve(responses: Vec<(u16, String)>) -> (String, mpsc::Receiver<(String, String)>) {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let url = format!("http://{}/rename", listener.local_addr().unwrap());
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            for (status, body) in responses {
                let (stream, _) = listener.accept().unwrap();
                let mut reader = BufReader::new(stream.try_clone().unwrap());
                let mut len = 0;
                let mut auth = String::new();
                loop {
                    let mut line = String::new();
                    reader.read_line(&mut line).unwrap();
                    let lower = line.to_ascii_lowercase();
                    if let Some(v) = lower.strip_prefix("content-length:") {
                        len = v.trim().parse().unwrap();
                    }
                    if lower.starts_with("authorization:") {
                        auth = line.trim().to_string();
                    }
                    if line == "\r\n" || line.is_empty() {
                        break;
                    }
                }
                let mut buf = vec![0; len];
                reader.read_exact(&mut buf).unwrap();
                tx.send((auth, String::from_utf8(buf).unwrap())).unwrap();
                let mut stream = stream;
                write!(
                    stream,
                    "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                    body.len()
                )
                .unwrap();
            }
        });
        (url, rx)
    }

    fn request() -> NamingRequest {
        NamingRequest {
            identifier: "batch".into(),
            kind: NameKind::Variable,
            role: Some("batch".into()),
            context: "for batch in [rows]:\n".into(),
            forbidden: ["rows".to_string()].into(),
            hints: vec!["rows".into()],
            synthetic: vec!["batch".into()],
        }
    }

    #[test]
    fn posts_the_batch_and_reads_renames() {
        let (url, rx) = serve(vec![(200, r#"{"renames": {"batch": "row_group"}}"#.into())]);
        let namer = RemoteNamer::new(&url, "m1", Some("k".into()));
        let out = namer.propose(&[request()]).unwrap();
        assert_eq!(out["batch"], "row_group");
        let (auth, body) = rx.recv().unwrap();
        assert_eq!(auth.to_ascii_lowercase(), "authorization: bearer k");
        let v: Value = serde_json::from_str(&body).unwrap();
        assert_eq!(v["identifiers"], json!(["batch"]));
        assert_eq!(v["forbidden"], json!(["rows"]));
        assert_eq!(v["model"], "m1");
    }

    #[test]
    fn errors_are_unavailable_or_malformed() {
        let (url, _rx) = serve(vec![(500, "{}".into()), (200, "not json".into())]);
        let namer = RemoteNamer::new(&url, "", None);
        assert!(matches!(namer.propose(&[request()]), Err(NamingError::Unavailable(_))));
        assert!(matches!(namer.propose(&[request()]), Err(NamingError::Malformed(_))));
    }

    #[test]
    fn unreachable_endpoint_degrades_to_fallback() {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let url = format!("http://{}/", listener.local_addr().unwrap());
        drop(listener);
        let namer = RemoteNamer::new(&url, "", None);
        let u = crate::unit::ProgramUnit::from_source(
            "u",
            "def f(rows):\n    batch = rows\n    return batch\n",
        )
        .unwrap();
        let names = vec![crate::operators::SyntheticName::new(
            "batch",
            NameKind::Variable,
            "batch",
            vec!["rows".into()],
        )];
        let (out, names) = super::super::naturalize_identifiers(&u, &names, &namer);
        assert_eq!(names[0].name, "row_batch");
        assert!(out.source_texts()["solution.py"].contains("row_batch = rows"));
    }
}
