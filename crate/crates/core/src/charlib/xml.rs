// SPDX-License-Identifier: Apache-2.0

//! XML persistence of component libraries.
//!
//! ```text
//! <library model="linear">
//!   <target name="ng_ultra" lut_capacity="550000" dsp_native_width="32"
//!           ram_ports_per_block="2" host_clock_mhz="600"/>
//!   <record opcode="add" widths="32" stages="0" clock_ns="10.000" delay_ns="2.100"
//!           latency="0" ii="1" lut="32" dsp="0" ram="0" feasible="true"/>
//! </library>
//! ```
//!
//! Times carry exactly three decimals, so picosecond values round-trip.

use std::collections::HashMap;
use std::fmt::Write;

use quick_xml::escape::escape;
use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;

use crate::middle::OpClass;

use super::library::{key_string, ComponentLibrary};
use super::model::*;
use super::target::TargetDescriptor;
use super::CharlibError;

pub fn export_xml(lib: &ComponentLibrary) -> String {
    let mut s = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<library model=\"linear\">\n");
    let t = &lib.target;
    let _ = writeln!(
        s,
        "  <target name=\"{}\" lut_capacity=\"{}\" dsp_native_width=\"{}\" ram_ports_per_block=\"{}\" host_clock_mhz=\"{}\"/>",
        escape(t.name.as_str()),
        t.lut_capacity,
        t.dsp_native_width,
        t.ram_ports_per_block,
        t.host_clock_mhz
    );
    for r in lib.records.values() {
        let _ = writeln!(
            s,
            "  <record opcode=\"{}\" widths=\"{}\" stages=\"{}\" clock_ns=\"{}\" delay_ns=\"{}\" latency=\"{}\" ii=\"{}\" lut=\"{}\" dsp=\"{}\" ram=\"{}\" feasible=\"{}\"/>",
            r.inst.opcode,
            r.inst.width,
            r.inst.stages,
            ps_to_ns_text(r.clock_ps),
            ps_to_ns_text(r.delay_ps),
            r.latency,
            r.ii,
            r.res.lut,
            r.res.dsp,
            r.res.ram,
            r.feasible
        );
    }
    s.push_str("</library>\n");
    s
}

fn attrs(e: &BytesStart, path: &str) -> Result<HashMap<String, String>, CharlibError> {
    let mut m = HashMap::new();
    for a in e.attributes() {
        let a = a.map_err(|err| CharlibError::Schema(format!("{path}: {err}")))?;
        let k = String::from_utf8_lossy(a.key.as_ref()).into_owned();
        let v = a
            .unescape_value()
            .map_err(|err| CharlibError::Schema(format!("{path}: {err}")))?
            .into_owned();
        if m.insert(k.clone(), v).is_some() {
            return Err(CharlibError::Schema(format!("{path}: repeated attribute '{k}'")));
        }
    }
    Ok(m)
}

struct Attrs {
    map: HashMap<String, String>,
    path: String,
}

impl Attrs {
    fn get(&mut self, k: &str) -> Result<String, CharlibError> {
        self.map
            .remove(k)
            .ok_or_else(|| CharlibError::Schema(format!("{}: missing attribute '{}'", self.path, k)))
    }

    fn num<T: std::str::FromStr>(&mut self, k: &str) -> Result<T, CharlibError> {
        let v = self.get(k)?;
        v.parse()
            .map_err(|_| CharlibError::Schema(format!("{}: bad value '{}' for '{}'", self.path, v, k)))
    }

    fn ns(&mut self, k: &str) -> Result<u32, CharlibError> {
        let v = self.get(k)?;
        parse_ns(&v).ok_or_else(|| CharlibError::Schema(format!("{}: bad time '{}' for '{}'", self.path, v, k)))
    }

    fn finish(self) -> Result<(), CharlibError> {
        let mut extra: Vec<_> = self.map.into_keys().collect();
        extra.sort();
        match extra.first() {
            Some(k) => Err(CharlibError::Schema(format!("{}: unknown attribute '{}'", self.path, k))),
            None => Ok(()),
        }
    }
}

/// Parses a non-negative decimal nanosecond value with at most three
/// significant fraction digits into picoseconds.
pub fn parse_ns(s: &str) -> Option<u32> {
    let (int, frac) = s.split_once('.').unwrap_or((s, ""));
    if int.is_empty() || !int.bytes().all(|b| b.is_ascii_digit()) || !frac.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let (keep, rest) = frac.split_at(frac.len().min(3));
    if rest.bytes().any(|b| b != b'0') {
        return None;
    }
    let mut f: u32 = if keep.is_empty() { 0 } else { keep.parse().ok()? };
    for _ in keep.len()..3 {
        f *= 10;
    }
    int.parse::<u32>().ok()?.checked_mul(1000)?.checked_add(f)
}

pub fn import_xml(text: &str) -> Result<ComponentLibrary, CharlibError> {
    let mut reader = Reader::from_str(text);
    reader.config_mut().trim_text(true);
    let mut stack: Vec<String> = Vec::new();
    let mut target: Option<TargetDescriptor> = None;
    let mut records = Vec::new();
    let mut seen_library = false;
    let mut nrec = 0usize;
    loop {
        let ev = reader
            .read_event()
            .map_err(|e| CharlibError::Schema(format!("malformed document at byte {}: {e}", reader.buffer_position())))?;
        let (e, empty) = match ev {
            Event::Start(e) => (e, false),
            Event::Empty(e) => (e, true),
            Event::End(_) => {
                stack.pop();
                continue;
            }
            Event::Eof => break,
            Event::Text(t) => {
                let path = stack.join("/");
                return Err(CharlibError::Schema(format!(
                    "{}: unexpected text '{}'",
                    if path.is_empty() { "document" } else { &path },
                    String::from_utf8_lossy(&t)
                )));
            }
            _ => continue,
        };
        let name = String::from_utf8_lossy(e.name().as_ref()).into_owned();
        let parent = stack.join("/");
        match (parent.as_str(), name.as_str()) {
            ("", "library") if !seen_library => {
                seen_library = true;
                let mut a = Attrs {
                    map: attrs(&e, "library")?,
                    path: "library".into(),
                };
                a.map.remove("model");
                a.finish()?;
            }
            ("library", "target") => {
                let path = "library/target".to_string();
                let mut a = Attrs {
                    map: attrs(&e, &path)?,
                    path,
                };
                if target.is_some() {
                    return Err(CharlibError::Schema("library/target: repeated element".into()));
                }
                target = Some(TargetDescriptor {
                    name: a.get("name")?,
                    lut_capacity: a.num("lut_capacity")?,
                    dsp_native_width: a.num("dsp_native_width")?,
                    ram_ports_per_block: a.num("ram_ports_per_block")?,
                    host_clock_mhz: a.num("host_clock_mhz")?,
                });
                a.finish()?;
            }
            ("library", "record") => {
                nrec += 1;
                let path = format!("library/record[{nrec}]");
                let mut a = Attrs {
                    map: attrs(&e, &path)?,
                    path: path.clone(),
                };
                let op = a.get("opcode")?;
                let opcode = OpClass::from_name(&op).ok_or_else(|| CharlibError::Schema(format!("{path}: unknown opcode '{op}'")))?;
                let inst = Instance {
                    opcode,
                    width: a.num("widths")?,
                    stages: a.num("stages")?,
                };
                if !is_legal(inst) {
                    return Err(CharlibError::Schema(format!("{path}: illegal configuration")));
                }
                let r = Record {
                    inst,
                    clock_ps: a.ns("clock_ns")?,
                    delay_ps: a.ns("delay_ns")?,
                    latency: a.num("latency")?,
                    ii: a.num("ii")?,
                    res: Resources {
                        lut: a.num("lut")?,
                        dsp: a.num("dsp")?,
                        ram: a.num("ram")?,
                    },
                    feasible: a.num("feasible")?,
                };
                a.finish()?;
                if r.clock_ps == 0 || r.ii == 0 {
                    return Err(CharlibError::Schema(format!("{path}: clock and ii must be positive")));
                }
                records.push(r);
            }
            _ => {
                let p = if parent.is_empty() {
                    name.clone()
                } else {
                    format!("{parent}/{name}")
                };
                return Err(CharlibError::Schema(format!("{p}: unexpected element")));
            }
        }
        if !empty {
            stack.push(name);
        }
    }
    if !seen_library {
        return Err(CharlibError::Schema("document: missing library element".into()));
    }
    let mut lib = ComponentLibrary::new(target.ok_or_else(|| CharlibError::Schema("library: missing target".into()))?);
    for r in records {
        let key = (r.inst, r.clock_ps);
        if lib.records.insert(key, r).is_some() {
            return Err(CharlibError::DuplicateKey(key_string(&key)));
        }
    }
    Ok(lib)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_and_small_round_trip() {
        let lib = ComponentLibrary::new(TargetDescriptor::default());
        let x = export_xml(&lib);
        assert_eq!(x.matches("<record").count(), 0);
        assert_eq!(import_xml(&x).unwrap(), lib);

        let mut lib = ComponentLibrary::new(TargetDescriptor::default());
        let model = LinearModel::default();
        for op in [OpClass::Add, OpClass::Mul, OpClass::Div] {
            let i = Instance {
                opcode: op,
                width: 16,
                stages: 0,
            };
            lib.insert(characterize(i, &[6670], &model, &lib.target.clone()).unwrap()[0])
                .unwrap();
        }
        assert_eq!(import_xml(&export_xml(&lib)).unwrap(), lib);
    }

    #[test]
    fn duplicate_record_named() {
        let lib = ComponentLibrary::default_library();
        let x = export_xml(&lib);
        let line = x.lines().find(|l| l.contains("<record")).unwrap().to_string();
        let dup = x.replacen(&line, &format!("{line}\n{line}"), 1);
        let e = import_xml(&dup).unwrap_err();
        assert_eq!(e.to_string(), "duplicate record key add/1/p0/2.000ns");
    }

    #[test]
    fn schema_errors_carry_paths() {
        let bad = "<library><target name=\"t\" lut_capacity=\"1\" dsp_native_width=\"32\" ram_ports_per_block=\"2\" host_clock_mhz=\"1\"/><record opcode=\"add\"/></library>";
        let e = import_xml(bad).unwrap_err().to_string();
        assert!(e.contains("library/record[1]: missing attribute 'widths'"), "{e}");
        assert!(import_xml("<lib/>").unwrap_err().to_string().contains("lib: unexpected element"));
    }

    #[test]
    fn decimal_parsing() {
        assert_eq!(parse_ns("2.1"), Some(2100));
        assert_eq!(parse_ns("6.670"), Some(6670));
        assert_eq!(parse_ns("10"), Some(10_000));
        assert_eq!(parse_ns("0.0005"), None);
        assert_eq!(parse_ns("-1"), None);
    }
}
