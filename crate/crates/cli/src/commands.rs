use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use serde_json::{json, Value};
use talentmine_core::build::{build_knowledge_base, corpus_grids, BuildConfig, LinearizerKind};
use talentmine_core::eval::{compare_methods, evaluate, load_gold, Comparison, EvalReport, MethodConfig};
use talentmine_core::fixtures::{generate_fixtures, FixtureSpec};
use talentmine_core::index::{kb_load, kb_save, Embedder, HashEmbedder, KnowledgeBase, TableGranularity};
use talentmine_core::ingest::{load_document, split_document, DocumentBundle, RasterEncoding};
use talentmine_core::linearize::{
    csv_linearize, llm_linearize, reference_linearize, render_linearized, CompletionProvider, PromptPayload, PromptTemplate,
    SentenceStyle,
};
use talentmine_core::qa::{answer_pipeline_traced, Answerer, ExtractiveAnswerer, MockQaProvider, ProviderAnswerer, QaSettings, Query};
use talentmine_core::tablemodel::tables_to_manifest;
use talentmine_service::{env_name, AppState, HttpCompletionProvider, ProviderSettings, ServiceConfig};

use crate::{AnswererArg, Cli, Command, Format, Granularity, Linearizer, ProviderArgs};

pub fn run(cli: &Cli) -> Result<()> {
    let fmt = cli.format;
    match &cli.command {
        Command::GenFixtures { seed, months, tiers, categories, gold_target, out, no_render } => {
            let spec = FixtureSpec { seed: *seed, months: *months, tiers: *tiers, categories: *categories, gold_target: *gold_target };
            gen_fixtures(fmt, &spec, out, !no_render)
        }
        Command::Ingest { docs, tables_out } => ingest(fmt, docs, tables_out.as_deref()),
        Command::Index { docs, kb, kb_id, linearizer, granularity, no_prose, dim, provider } => {
            let config = BuildConfig {
                kb_id: kb_id.clone(),
                linearizer: linearizer_kind(*linearizer),
                granularity: match granularity {
                    Granularity::PerSentence => TableGranularity::PerSentence,
                    Granularity::PerTable => TableGranularity::PerTable,
                },
                include_prose: !no_prose,
                ..BuildConfig::default()
            };
            index(fmt, docs, kb, &config, *dim, provider)
        }
        Command::Linearize { doc, linearizer, preamble, out, provider } => {
            linearize(fmt, doc, *linearizer, *preamble, out.as_deref(), provider)
        }
        Command::Render { manifest, out, inline } => render(fmt, manifest, out, *inline),
        Command::Ask { question, kb, k, answerer, trace, provider } => ask(fmt, question, kb, *k, *answerer, *trace, provider),
        Command::Eval { gold, docs, methods, kb, k, out } => eval(fmt, gold, docs, methods, kb.as_deref(), *k, out.as_deref()),
        Command::Serve { config, port, kb } => serve(config.as_deref(), *port, kb.as_deref()),
    }
}

fn print_json(v: &Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("JSON value serializes"));
}

fn linearizer_kind(l: Linearizer) -> LinearizerKind {
    match l {
        Linearizer::Reference => LinearizerKind::Reference,
        Linearizer::Provider => LinearizerKind::Provider,
        Linearizer::Csv => LinearizerKind::Csv,
    }
}

fn http_provider(args: &ProviderArgs) -> Result<HttpCompletionProvider> {
    let Some(endpoint) = args.provider_endpoint.clone() else {
        bail!("this command needs --provider-endpoint");
    };
    let api_key = args.provider_api_key.clone().or_else(|| std::env::var(env_name("provider.api_key")).ok());
    Ok(HttpCompletionProvider::new(ProviderSettings { endpoint, api_key, model: args.provider_model.clone(), timeout_secs: 60 }))
}

fn load_docs(paths: &[PathBuf]) -> Result<Vec<DocumentBundle>> {
    paths.iter().map(|p| load_document(p).with_context(|| format!("loading {}", p.display()))).collect()
}

fn write(path: &Path, content: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, content).with_context(|| format!("writing {}", path.display()))
}

fn gen_fixtures(fmt: Format, spec: &FixtureSpec, out: &Path, render: bool) -> Result<()> {
    let fixture = generate_fixtures(spec)?;
    let written = fixture.write_to(out, render)?;
    let cells: usize = fixture.grids.iter().map(|g| g.data_cell_count()).sum();
    match fmt {
        Format::Json => print_json(&json!({
            "out": out,
            "tables": fixture.grids.len(),
            "data_cells": cells,
            "gold": fixture.gold.len(),
            "files": written,
        })),
        Format::Text => {
            println!("{} tables, {cells} data cells, {} gold questions", fixture.grids.len(), fixture.gold.len());
            for p in written {
                println!("wrote {}", p.display());
            }
        }
    }
    Ok(())
}

fn ingest(fmt: Format, paths: &[PathBuf], tables_out: Option<&Path>) -> Result<()> {
    let docs = load_docs(paths)?;
    let mut reports = Vec::new();
    let mut grids = Vec::new();
    for doc in &docs {
        let split = split_document(&doc.source, doc.annotations.as_deref())
            .with_context(|| format!("splitting {:?}", doc.source.doc_id))?;
        let regions: Vec<Value> = split
            .regions
            .iter()
            .map(|r| {
                json!({
                    "region_id": r.region_id,
                    "page_index": r.page_index,
                    "bbox": r.bbox,
                    "table_id": r.grid.as_ref().map(|g| g.table_id.clone()),
                    "data_cells": r.grid.as_ref().map(|g| g.data_cell_count()),
                })
            })
            .collect();
        grids.extend(split.regions.into_iter().filter_map(|r| r.grid));
        reports.push(json!({
            "doc_id": doc.source.doc_id,
            "pages": doc.source.pages.len(),
            "prose_blocks": split.prose.len(),
            "regions": regions,
        }));
    }
    if let Some(path) = tables_out {
        write(path, &tables_to_manifest(&grids))?;
    }
    match fmt {
        Format::Json => print_json(&json!({ "documents": reports })),
        Format::Text => {
            for r in &reports {
                println!("{}: {} pages, {} prose blocks", r["doc_id"].as_str().unwrap_or_default(), r["pages"], r["prose_blocks"]);
                for region in r["regions"].as_array().into_iter().flatten() {
                    let table = region["table_id"].as_str().unwrap_or("(no annotation)");
                    println!("  {} page {} {}", region["region_id"].as_str().unwrap_or_default(), region["page_index"], table);
                }
            }
        }
    }
    Ok(())
}

fn index(fmt: Format, paths: &[PathBuf], kb_path: &Path, config: &BuildConfig, dim: usize, provider: &ProviderArgs) -> Result<()> {
    let docs = load_docs(paths)?;
    let http = match config.linearizer {
        LinearizerKind::Provider => Some(http_provider(provider)?),
        _ => None,
    };
    let embedder = HashEmbedder::new(dim);
    let (kb, _, summary) = build_knowledge_base(&docs, config, &embedder, http.as_ref().map(|p| p as &dyn CompletionProvider))?;
    kb_save(&kb, kb_path)?;
    match fmt {
        Format::Json => print_json(&json!({ "kb": kb_path, "summary": summary })),
        Format::Text => println!(
            "{} chunks ({} table, {} prose) from {} tables in {} documents -> {}",
            summary.chunk_count,
            summary.table_chunks,
            summary.prose_chunks,
            summary.table_count,
            summary.doc_count,
            kb_path.display()
        ),
    }
    Ok(())
}

fn linearize(fmt: Format, path: &Path, which: Linearizer, preamble: bool, out: Option<&Path>, provider: &ProviderArgs) -> Result<()> {
    let doc = load_document(path).with_context(|| format!("loading {}", path.display()))?;
    let grids = corpus_grids(std::slice::from_ref(&doc))?;
    let style = SentenceStyle { preamble };
    let http = if which == Linearizer::Provider { Some(http_provider(provider)?) } else { None };
    let template = PromptTemplate::default_table_to_text();
    let mut text = String::new();
    let mut tables = Vec::new();
    for g in &grids {
        match which {
            Linearizer::Csv => {
                let csv = csv_linearize(g);
                tables.push(json!({ "table_id": g.table_id, "lines": csv.lines().count(), "csv": csv }));
                text.push_str(&csv);
            }
            Linearizer::Reference | Linearizer::Provider => {
                let lin = match &http {
                    Some(p) => llm_linearize(g, PromptPayload::Grid(g), p, &template)?,
                    None => reference_linearize(g, style)?,
                };
                tables.push(json!({ "table_id": g.table_id, "sentences": lin.sentences.len(), "linearized": lin }));
                text.push_str(&render_linearized(&lin));
            }
        }
    }
    if let Some(path) = out {
        write(path, &text)?;
    }
    match fmt {
        Format::Json => print_json(&json!({ "doc_id": doc.source.doc_id, "tables": tables })),
        Format::Text if out.is_none() => print!("{text}"),
        Format::Text => println!("{} tables -> {}", grids.len(), out.map(Path::display).expect("out is set")),
    }
    Ok(())
}

fn render(fmt: Format, manifest: &Path, out: &Path, inline: bool) -> Result<()> {
    let doc = load_document(manifest).with_context(|| format!("loading {}", manifest.display()))?;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let mut written = Vec::new();
    let encoding = if inline {
        RasterEncoding::Inline
    } else {
        let mut names = Vec::new();
        for p in &doc.source.pages {
            let name = format!("page-{}.pgm", p.page_index);
            if let Some(r) = &p.raster {
                let path = out.join(&name);
                fs::write(&path, r.to_pgm()).with_context(|| format!("writing {}", path.display()))?;
                written.push(path);
            }
            names.push(name);
        }
        RasterEncoding::Paths(names)
    };
    let bundle_path = out.join(format!("{}.bundle.json", doc.source.doc_id));
    write(&bundle_path, &doc.to_json(&encoding)?)?;
    written.push(bundle_path);
    match fmt {
        Format::Json => print_json(&json!({ "doc_id": doc.source.doc_id, "pages": doc.source.pages.len(), "files": written })),
        Format::Text => {
            for p in written {
                println!("wrote {}", p.display());
            }
        }
    }
    Ok(())
}

fn answerer_for(which: AnswererArg, kb: &Arc<KnowledgeBase>, provider: &ProviderArgs) -> Result<Box<dyn Answerer>> {
    Ok(match which {
        AnswererArg::Extractive => Box::new(ExtractiveAnswerer::default()),
        AnswererArg::Mock => Box::new(ProviderAnswerer::new(Arc::new(MockQaProvider::new(kb.clone())))),
        AnswererArg::Provider => Box::new(ProviderAnswerer::new(Arc::new(http_provider(provider)?))),
    })
}

fn load_kb(path: &Path) -> Result<(Arc<KnowledgeBase>, HashEmbedder)> {
    let kb = kb_load(path).with_context(|| format!("loading knowledge base {}", path.display()))?;
    let embedder = HashEmbedder::new(kb.dim());
    if kb.embedder_id() != embedder.id() {
        bail!("{} was built with embedder {:?}, which this build does not provide", path.display(), kb.embedder_id());
    }
    Ok((Arc::new(kb), embedder))
}

fn ask(fmt: Format, question: &str, kb_path: &Path, k: usize, which: AnswererArg, trace: bool, provider: &ProviderArgs) -> Result<()> {
    let (kb, embedder) = load_kb(kb_path)?;
    let answerer = answerer_for(which, &kb, provider)?;
    let settings = QaSettings { k, ..QaSettings::default() };
    let t = answer_pipeline_traced(&Query::new(question), &kb, &embedder, answerer.as_ref(), &settings)?;
    let citations: Vec<Value> = t
        .answer
        .citations
        .iter()
        .map(|id| {
            let chunk = kb.chunk(id);
            json!({ "chunk_id": id, "text": chunk.map(|c| c.text.clone()), "provenance": chunk.and_then(|c| c.provenance.clone()) })
        })
        .collect();
    match fmt {
        Format::Json => {
            let mut v = json!({
                "text": t.answer.text,
                "value_cents": t.answer.value.map(|v| v.amount_cents),
                "citations": citations,
                "status": t.answer.status,
            });
            if trace {
                v["retrieval"] = serde_json::to_value(&t.retrieval.hits)?;
            }
            print_json(&v);
        }
        Format::Text => {
            println!("{}", t.answer.text);
            for c in &citations {
                println!("  [{}] {}", c["chunk_id"].as_str().unwrap_or_default(), c["text"].as_str().unwrap_or_default());
            }
            if trace {
                for (rank, h) in t.retrieval.hits.iter().enumerate() {
                    let text = kb.chunk(&h.chunk_id).map(|c| c.text.as_str()).unwrap_or_default();
                    println!("  #{} {:.4} {} {}", rank + 1, h.score, h.chunk_id, text);
                }
            }
        }
    }
    Ok(())
}

fn write_reports(dir: &Path, text: &str, json: &str, reports: &[EvalReport]) -> Result<()> {
    write(&dir.join("comparison.txt"), text)?;
    write(&dir.join("comparison.json"), json)?;
    for r in reports {
        write(&dir.join(format!("{}.json", r.method)), &r.to_json())?;
        write(&dir.join(format!("{}.txt", r.method)), &r.render_text())?;
    }
    Ok(())
}

fn eval(fmt: Format, gold_path: &Path, doc_paths: &[PathBuf], methods: &str, kb_path: Option<&Path>, k: usize, out: Option<&Path>) -> Result<()> {
    let docs = load_docs(doc_paths)?;
    let grids = if docs.is_empty() { None } else { Some(corpus_grids(&docs)?) };
    let gold = load_gold(gold_path, grids.as_deref())?;
    let comparison = match kb_path {
        Some(path) => {
            let (kb, embedder) = load_kb(path)?;
            let answerer = ExtractiveAnswerer::default();
            let mut method = MethodConfig::semantic();
            method.label = "kb".into();
            method.k = k;
            method.embedder_dim = embedder.dim();
            let report = evaluate(&method.label, &method.fingerprint(), &kb, &embedder, &answerer, &method.settings(), &gold)?;
            Comparison::from_reports(vec![report])
        }
        None => {
            if docs.is_empty() {
                bail!("no knowledge base: pass --docs to build one per method, or --kb");
            }
            let configs = methods
                .split(',')
                .filter(|m| !m.trim().is_empty())
                .map(|m| {
                    let mut c = MethodConfig::by_name(m)?;
                    c.k = k;
                    Ok(c)
                })
                .collect::<Result<Vec<_>>>()?;
            compare_methods(&configs, &gold, &docs)?
        }
    };
    let text = comparison.render_text();
    let json = comparison.to_json();
    if let Some(dir) = out {
        write_reports(dir, &text, &json, &comparison.reports)?;
    }
    match fmt {
        Format::Json => print!("{json}"),
        Format::Text => print!("{text}"),
    }
    Ok(())
}

fn serve(config_path: Option<&Path>, port: Option<u16>, kb: Option<&Path>) -> Result<()> {
    let mut config = ServiceConfig::load(config_path)?;
    if let Some(p) = port {
        config.port = p;
    }
    if let Some(k) = kb {
        config.kb_path = Some(k.to_path_buf());
    }
    let state = Arc::new(AppState::new(config)?);
    eprintln!("listening on http://{}", state.config().bind_addr());
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(talentmine_service::serve(state))?;
    Ok(())
}

