use std::ffi::OsString;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand};

use super::{DataDir, ServeConfig, DATA_DIR_ENV, DEFAULT_PORT};
use crate::demo;
use crate::error::Error;
use crate::ingest::{self, LinkResolution, UnresolvedPolicy};
use crate::recognition::match_report;
use crate::reports::{self, Format};
use crate::store::{ObjectId, Store};
use crate::traversal::{Filter, Session};
use crate::value::{Kind, Value};
use crate::vocabulary::{AttributeDef, Vocabulary};

#[derive(Debug, Parser)]
#[command(name = "panoptica", version, about = "Navigational object store with focus+context browsing")]
pub struct Cli {
    /// Directory holding vocabulary.json and store.json.
    #[arg(long, global = true, env = DATA_DIR_ENV, default_value = ".")]
    data_dir: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build and check the data vocabulary.
    #[command(subcommand)]
    Vocab(VocabCommand),
    /// Controlled input of objects.
    #[command(subcommand)]
    Data(DataCommand),
    /// Browse the known objects.
    #[command(subcommand)]
    View(ViewCommand),
    /// Reports and whole-store exports.
    #[command(subcommand)]
    Report(ReportCommand),
    /// Run the HTTP service.
    Serve {
        #[arg(long, default_value_t = DEFAULT_PORT)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        /// Minutes of inactivity after which a session expires.
        #[arg(long, default_value_t = 60)]
        idle_minutes: u64,
    },
    /// Write the opera catalogue into the data directory.
    Demo {
        /// Overwrite existing files.
        #[arg(long)]
        force: bool,
    },
}

#[derive(Debug, Subcommand)]
enum VocabCommand {
    /// Start an empty vocabulary.
    New {
        name: String,
        #[arg(long)]
        force: bool,
    },
    AddClass {
        name: String,
        #[arg(long)]
        intermediate: bool,
    },
    AddAttr {
        class: String,
        name: String,
        kind: Kind,
        /// Target class of a link attribute.
        #[arg(long)]
        target: Option<String>,
        #[arg(long)]
        required: bool,
    },
    /// Create an intermediate class linking two or more participants.
    AddRel {
        name: String,
        #[arg(required = true, num_args = 2..)]
        participants: Vec<String>,
        /// Allow several objects with the same concatenated key.
        #[arg(long)]
        allow_duplicate_keys: bool,
    },
    /// Check a vocabulary file (default: the data directory's).
    Validate { file: Option<PathBuf> },
    /// Print the relational schema.
    CompileDdl { file: Option<PathBuf> },
}

#[derive(Debug, Subcommand)]
enum DataCommand {
    /// Insert one object from `attribute=value` pairs. Link values take an
    /// id or the unique label of the target.
    Insert {
        class: String,
        values: Vec<String>,
    },
    Import(ImportArgs),
    /// Recognize which class a delimited file describes.
    Inspect { file: PathBuf },
    Delete {
        id: u64,
        /// Clear optional links pointing at the object first.
        #[arg(long)]
        detach: bool,
    },
}

#[derive(Debug, Args)]
struct ImportArgs {
    file: PathBuf,
    /// Target class; defaults to the recognized one.
    #[arg(long)]
    class: Option<String>,
    /// `column=attribute`; replaces the proposed mapping when given.
    #[arg(long = "map")]
    maps: Vec<String>,
    /// Link attributes whose cells hold ids rather than labels.
    #[arg(long = "by-id")]
    by_id: Vec<String>,
    /// Create label-only targets for unresolved by-label links.
    #[arg(long)]
    create_stubs: bool,
}

#[derive(Debug, Subcommand)]
enum ViewCommand {
    /// Show an object with its context.
    Focus { id: u64 },
    /// Class counts, or the objects of one class.
    List {
        class: Option<String>,
        /// `attribute=text` substring filter on the listed class.
        #[arg(long)]
        contains: Vec<String>,
    },
}

#[derive(Debug, Subcommand)]
enum ReportCommand {
    Object {
        id: u64,
        #[arg(long, default_value = "txt")]
        format: Format,
    },
    List {
        class: String,
        /// Comma-separated attribute names.
        #[arg(long)]
        columns: Option<String>,
        #[arg(long)]
        contains: Vec<String>,
        #[arg(long, default_value = "txt")]
        format: Format,
    },
    Export {
        #[arg(long, default_value = "xml")]
        format: Format,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
}

enum Failure {
    Usage(String),
    Domain(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Domain(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Domain(Error::Io(e))
    }
}

type Outcome = std::result::Result<(), Failure>;

/// Runs one command line. Exit status: 0 success, 1 domain error (one line
/// on `err`), 2 usage error.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    match execute(cli, out) {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "usage error: {msg}");
            2
        }
        Err(Failure::Domain(e)) => {
            let _ = writeln!(err, "error[{}]: {}", e.code(), e.to_string().replace('\n', " "));
            1
        }
    }
}

fn execute(cli: Cli, out: &mut dyn Write) -> Outcome {
    let data = DataDir::new(&cli.data_dir);
    match cli.command {
        Command::Vocab(cmd) => vocab(&data, cmd, out),
        Command::Data(cmd) => data_command(&data, cmd, out),
        Command::View(cmd) => view(&data, cmd, out),
        Command::Report(cmd) => report(&data, cmd, out),
        Command::Serve {
            port,
            host,
            idle_minutes,
        } => {
            let config = ServeConfig {
                data_dir: cli.data_dir.clone(),
                host,
                port,
                idle: Duration::from_secs(idle_minutes * 60),
            };
            let runtime = tokio::runtime::Runtime::new()?;
            runtime.block_on(super::serve(config, |addr| {
                let _ = writeln!(out, "listening on http://{addr}");
                let _ = out.flush();
            }))?;
            Ok(())
        }
        Command::Demo { force } => {
            refuse_overwrite(&data.vocabulary_path(), force)?;
            let store = demo::opera_store();
            data.save(&store)?;
            writeln!(out, "wrote {} objects to {}", store.len(), data.path().display())?;
            Ok(())
        }
    }
}

fn refuse_overwrite(path: &Path, force: bool) -> Outcome {
    if path.exists() && !force {
        return Err(Error::Io(io::Error::new(
            io::ErrorKind::AlreadyExists,
            format!("{} exists; pass --force to replace it", path.display()),
        ))
        .into());
    }
    Ok(())
}

/// Saves a changed vocabulary after checking that stored objects still fit it.
fn commit_vocabulary(data: &DataDir, vocab: Vocabulary) -> Outcome {
    if data.store_path().exists() {
        let store = data.load_store()?;
        let migrated = store.with_vocabulary(vocab)?;
        data.save(&migrated)?;
    } else {
        data.save_vocabulary(&vocab)?;
    }
    Ok(())
}

fn vocab(data: &DataDir, cmd: VocabCommand, out: &mut dyn Write) -> Outcome {
    match cmd {
        VocabCommand::New { name, force } => {
            refuse_overwrite(&data.vocabulary_path(), force)?;
            let vocab = Vocabulary::new(name);
            data.save_vocabulary(&vocab)?;
            if data.store_path().exists() {
                data.save_store(&Store::new(vocab.clone())?)?;
            }
            writeln!(out, "created vocabulary {}", vocab.name)?;
        }
        VocabCommand::AddClass { name, intermediate } => {
            let vocab = data.load_vocabulary()?.create_class(&name, intermediate)?;
            commit_vocabulary(data, vocab)?;
            writeln!(out, "added class {name}")?;
        }
        VocabCommand::AddAttr {
            class,
            name,
            kind,
            target,
            required,
        } => {
            let mut def = match (kind, target) {
                (Kind::Link, Some(target)) => AttributeDef::link(&name, target),
                (Kind::Link, None) => return Err(Failure::Usage("a link attribute needs --target".into())),
                (_, Some(_)) => return Err(Failure::Usage("--target only applies to link attributes".into())),
                (kind, None) => AttributeDef::scalar(&name, kind),
            };
            if required {
                def = def.required();
            }
            let vocab = data.load_vocabulary()?.add_attribute(&class, def)?;
            commit_vocabulary(data, vocab)?;
            writeln!(out, "added {class}.{name}")?;
        }
        VocabCommand::AddRel {
            name,
            participants,
            allow_duplicate_keys,
        } => {
            let refs: Vec<&str> = participants.iter().map(String::as_str).collect();
            let mut vocab = data.load_vocabulary()?.create_relationship(&name, &refs, Vec::new())?;
            if allow_duplicate_keys {
                vocab = vocab.set_key_unique(&name, false)?;
            }
            let links: Vec<String> = vocab
                .require_class(&name)?
                .link_attributes()
                .map(|a| a.name.clone())
                .collect();
            commit_vocabulary(data, vocab)?;
            writeln!(out, "added relationship {name} ({})", links.join(", "))?;
        }
        VocabCommand::Validate { file } => {
            let vocab = Vocabulary::load(file.unwrap_or_else(|| data.vocabulary_path()))?;
            vocab.ensure_valid()?;
            writeln!(out, "OK")?;
        }
        VocabCommand::CompileDdl { file } => {
            let vocab = Vocabulary::load(file.unwrap_or_else(|| data.vocabulary_path()))?;
            out.write_all(vocab.compile_ddl()?.as_bytes())?;
        }
    }
    Ok(())
}

fn split_pair(raw: &str) -> Result<(&str, &str), Failure> {
    raw.split_once('=')
        .ok_or_else(|| Failure::Usage(format!("expected `name=value`, got `{raw}`")))
}

fn object_id(raw: u64) -> Result<ObjectId, Failure> {
    ObjectId::new(raw).ok_or_else(|| Failure::Usage("object ids start at 1".into()))
}

/// Parses a CLI cell; link cells may name the target by its unique label.
fn cli_value(store: &Store, class: &str, attribute: &str, raw: &str) -> Result<Value, Failure> {
    let def = store.vocabulary().require_attribute(class, attribute)?;
    if let Some(v) = Value::parse(def.kind, raw) {
        return Ok(v);
    }
    if let Some(target) = &def.target_class {
        match store.find_by_label(target, raw.trim())?.as_slice() {
            [id] => return Ok(Value::Link(*id)),
            [] => {}
            many => {
                return Err(Error::AmbiguousLink {
                    class: target.clone(),
                    label: raw.trim().to_string(),
                    count: many.len(),
                }
                .into())
            }
        }
        return Err(Error::UnresolvedLink {
            attribute: attribute.to_string(),
            class: target.clone(),
            reference: raw.to_string(),
        }
        .into());
    }
    Err(Error::KindMismatch {
        attribute: attribute.to_string(),
        expected: def.kind.to_string(),
        found: format!("`{raw}`"),
    }
    .into())
}

fn data_command(data: &DataDir, cmd: DataCommand, out: &mut dyn Write) -> Outcome {
    match cmd {
        DataCommand::Insert { class, values } => {
            let mut store = data.load_store()?;
            let mut parsed = Vec::new();
            for raw in &values {
                let (name, value) = split_pair(raw)?;
                parsed.push((name.to_string(), cli_value(&store, &class, name, value)?));
            }
            let id = store.insert(&class, parsed)?;
            data.save_store(&store)?;
            writeln!(out, "inserted #{id} {}", store.label(id))?;
        }
        DataCommand::Import(args) => {
            let mut store = data.load_store()?;
            let source = std::fs::read_to_string(&args.file)?;
            let mut mapping = match &args.class {
                Some(class) => ingest::propose_mapping(store.vocabulary(), class, &ingest::parse_table(&source)?)?,
                None => ingest::inspect_in(&store, &source)?.mapping,
            };
            if !args.maps.is_empty() {
                mapping.column_map.clear();
                for raw in &args.maps {
                    let (column, attribute) = split_pair(raw)?;
                    mapping.column_map.insert(column.to_string(), attribute.to_string());
                }
            }
            for attribute in &args.by_id {
                mapping.link_resolution.insert(attribute.clone(), LinkResolution::ById);
            }
            if args.create_stubs {
                mapping.unresolved_policy = UnresolvedPolicy::CreateStub;
            }
            let report = ingest::import(&mut store, &mapping, &source)?;
            data.save_store(&store)?;
            writeln!(
                out,
                "class {}: inserted {}, rejected {}, stubs created {}",
                mapping.class,
                report.inserted,
                report.rejected.len(),
                report.stubs_created
            )?;
            for r in &report.rejected {
                writeln!(out, "  row {}: {}: {}", r.row, r.code, r.message)?;
            }
        }
        DataCommand::Inspect { file } => {
            let store = data.load_store()?;
            let source = std::fs::read_to_string(&file)?;
            let inspection = ingest::inspect_in(&store, &source)?;
            for m in &inspection.ranking {
                writeln!(out, "{}", match_report(m))?;
            }
            writeln!(out, "\nproposed mapping to {}:", inspection.mapping.class)?;
            for (column, attribute) in &inspection.mapping.column_map {
                match inspection.mapping.link_resolution.get(attribute) {
                    Some(how) => writeln!(out, "  {column} -> {attribute} ({})", how.as_str())?,
                    None => writeln!(out, "  {column} -> {attribute}")?,
                }
            }
        }
        DataCommand::Delete { id, detach } => {
            let mut store = data.load_store()?;
            let id = object_id(id)?;
            let label = store.label(id);
            store.delete(id, detach)?;
            data.save_store(&store)?;
            writeln!(out, "deleted #{id} {label}")?;
        }
    }
    Ok(())
}

fn contains_filter(class: &str, pairs: &[String]) -> Result<Option<Filter>, Failure> {
    if pairs.is_empty() {
        return Ok(None);
    }
    let mut filter = Filter::new(class);
    for raw in pairs {
        let (attribute, needle) = split_pair(raw)?;
        filter = filter.with(attribute, crate::traversal::Predicate::Contains(needle.to_string()));
    }
    Ok(Some(filter))
}

fn view(data: &DataDir, cmd: ViewCommand, out: &mut dyn Write) -> Outcome {
    let store = data.load_store()?;
    let mut session = Session::new();
    match cmd {
        ViewCommand::Focus { id } => {
            let view = session.focus(&store, object_id(id)?)?;
            out.write_all(reports::object_txt(&view).as_bytes())?;
        }
        ViewCommand::List { class: None, .. } => {
            for c in session.list_classes(&store) {
                writeln!(out, "{}: {}", c.class, c.count)?;
            }
        }
        ViewCommand::List {
            class: Some(class),
            contains,
        } => {
            if let Some(filter) = contains_filter(&class, &contains)? {
                session.set_filter(store.vocabulary(), filter)?;
            }
            for o in session.select_class(&store, &class)? {
                writeln!(out, "#{} {}", o.id, o.label)?;
            }
        }
    }
    Ok(())
}

fn report(data: &DataDir, cmd: ReportCommand, out: &mut dyn Write) -> Outcome {
    let store = data.load_store()?;
    match cmd {
        ReportCommand::Object { id, format } => {
            out.write_all(reports::object_report(&store, object_id(id)?, format)?.as_bytes())?;
        }
        ReportCommand::List {
            class,
            columns,
            contains,
            format,
        } => {
            let columns: Vec<String> = columns
                .as_deref()
                .map(|c| c.split(',').map(str::trim).filter(|c| !c.is_empty()).map(String::from).collect())
                .unwrap_or_default();
            let filter = contains_filter(&class, &contains)?;
            out.write_all(reports::list_report(&store, &class, filter.as_ref(), &columns, format)?.as_bytes())?;
        }
        ReportCommand::Export { format, output } => {
            let doc = reports::export_store(&store, format)?;
            match output {
                Some(path) => {
                    crate::fsutil::write_atomic(&path, doc.as_bytes())?;
                    writeln!(out, "wrote {}", path.display())?;
                }
                None => out.write_all(doc.as_bytes())?,
            }
        }
    }
    Ok(())
}
