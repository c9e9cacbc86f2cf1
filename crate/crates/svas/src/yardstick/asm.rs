//! A small assembler for the compiler: commands reference counters and
//! symbols by id but jump targets by symbolic label, resolved at assembly
//! time. Every emitted command carries the current region, gadget path and
//! source attribution, which become the source map.

use std::collections::{BTreeMap, HashMap, HashSet};

use crate::exec::{ChoiceAnnotation, ChoiceAnnotationTable, ChoicePredicate};
use crate::program::{Command, CounterId, SvasProgram, SymbolId};
use crate::yardstick::{Region, SourceEntry, SourceMap};

enum Draft {
    Inc(CounterId),
    Dec(CounterId),
    Push(SymbolId),
    Pop(SymbolId),
    Goto(String, String),
    Halt,
}

pub(crate) struct Asm {
    counters: Vec<String>,
    symbols: Vec<String>,
    used_names: HashSet<String>,
    cmds: Vec<Draft>,
    entries: Vec<SourceEntry>,
    labels: HashMap<String, usize>,
    annotations: Vec<(usize, ChoiceAnnotation)>,
    label_seq: usize,
    pub region: Region,
    pub gadget: String,
    pub source: Option<usize>,
}

impl Asm {
    pub fn new() -> Self {
        Asm {
            counters: Vec::new(),
            symbols: Vec::new(),
            used_names: HashSet::new(),
            cmds: Vec::new(),
            entries: Vec::new(),
            labels: HashMap::new(),
            annotations: Vec::new(),
            label_seq: 0,
            region: Region::Main,
            gadget: String::new(),
            source: None,
        }
    }

    /// Reserves names so that generated counters and symbols never collide
    /// with them.
    pub fn reserve_names<'a>(&mut self, names: impl IntoIterator<Item = &'a str>) {
        for n in names {
            self.used_names.insert(n.to_string());
        }
    }

    fn unique_name(&mut self, base: &str) -> String {
        let mut name = base.to_string();
        while self.used_names.contains(&name) {
            name.push('_');
        }
        self.used_names.insert(name.clone());
        name
    }

    pub fn new_counter(&mut self, base: &str) -> CounterId {
        let name = self.unique_name(base);
        self.counters.push(name);
        CounterId(self.counters.len() - 1)
    }

    /// Declares a counter under exactly this name; the caller guarantees it
    /// was reserved and is unique.
    pub fn new_counter_exact(&mut self, name: &str) -> CounterId {
        debug_assert!(self.used_names.contains(name));
        self.counters.push(name.to_string());
        CounterId(self.counters.len() - 1)
    }

    pub fn new_symbol(&mut self, base: &str) -> SymbolId {
        let name = self.unique_name(base);
        self.symbols.push(name);
        SymbolId(self.symbols.len() - 1)
    }

    pub fn counter_count(&self) -> usize {
        self.counters.len()
    }

    pub fn here(&self) -> usize {
        self.cmds.len()
    }

    pub fn fresh_label(&mut self, hint: &str) -> String {
        self.label_seq += 1;
        format!("{hint}_{}", self.label_seq)
    }

    /// Binds `name` to the next emitted command.
    pub fn bind(&mut self, name: &str) {
        let prev = self.labels.insert(name.to_string(), self.cmds.len());
        assert!(prev.is_none(), "label {name} bound twice");
    }

    pub fn bind_fresh(&mut self, hint: &str) -> String {
        let l = self.fresh_label(hint);
        self.bind(&l);
        l
    }

    fn emit(&mut self, cmd: Draft) -> usize {
        let idx = self.cmds.len();
        self.cmds.push(cmd);
        self.entries.push(SourceEntry {
            gadget: self.gadget.clone(),
            region: self.region,
            source: self.source,
            suspends: None,
            resumes: None,
        });
        idx
    }

    pub fn inc(&mut self, c: CounterId) -> usize {
        self.emit(Draft::Inc(c))
    }

    pub fn dec(&mut self, c: CounterId) -> usize {
        self.emit(Draft::Dec(c))
    }

    pub fn push(&mut self, s: SymbolId) -> usize {
        self.emit(Draft::Push(s))
    }

    pub fn pop(&mut self, s: SymbolId) -> usize {
        self.emit(Draft::Pop(s))
    }

    pub fn goto(&mut self, target: &str) -> usize {
        self.emit(Draft::Goto(target.to_string(), target.to_string()))
    }

    pub fn goto_choice(
        &mut self,
        first: &str,
        second: &str,
        predicate: ChoicePredicate,
        branch_if_true: bool,
    ) -> usize {
        let idx = self.emit(Draft::Goto(first.to_string(), second.to_string()));
        self.annotations.push((
            idx,
            ChoiceAnnotation {
                predicate,
                branch_if_true,
            },
        ));
        idx
    }

    pub fn halt(&mut self) -> usize {
        self.emit(Draft::Halt)
    }

    /// Marks the last emitted command as the second half of a paired update
    /// of `pair` (by global pair index): a configuration sitting at it may
    /// see the pair's sum one short.
    pub fn suspends_pair(&mut self, pair: usize) {
        self.entries
            .last_mut()
            .expect("no command emitted yet")
            .suspends = Some(pair);
    }

    /// Marks the last emitted command as resuming a call site in `region`.
    pub fn resumes(&mut self, region: Region) {
        self.entries
            .last_mut()
            .expect("no command emitted yet")
            .resumes = Some(region);
    }

    pub fn assemble(self) -> (SvasProgram, ChoiceAnnotationTable, SourceMap) {
        let resolve = |name: &String| -> usize {
            *self
                .labels
                .get(name)
                .unwrap_or_else(|| panic!("unresolved label {name}"))
        };
        let commands: Vec<Command> = self
            .cmds
            .iter()
            .map(|c| match c {
                Draft::Inc(x) => Command::Inc(*x),
                Draft::Dec(x) => Command::Dec(*x),
                Draft::Push(s) => Command::Push(*s),
                Draft::Pop(s) => Command::Pop(*s),
                Draft::Goto(a, b) => Command::Goto(resolve(a), resolve(b)),
                Draft::Halt => Command::Halt,
            })
            .collect();
        let labels: BTreeMap<String, usize> = self.labels.into_iter().collect();
        let program = SvasProgram::from_parts(self.counters, self.symbols, commands, labels);
        let mut table = ChoiceAnnotationTable::default();
        for (idx, ann) in self.annotations {
            table.by_goto.insert(idx, ann);
        }
        (
            program,
            table,
            SourceMap {
                entries: self.entries,
            },
        )
    }
}
