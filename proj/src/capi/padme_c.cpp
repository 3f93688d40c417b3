#include "padme/padme.h"

#include <cstdio>
#include <cstring>
#include <new>
#include <string>

#include "padme/config.hpp"
#include "padme/error.hpp"
#include "padme/fingerprint.hpp"
#include "padme/log.hpp"
#include "padme/metrics.hpp"
#include "padme/model.hpp"
#include "padme/pipeline.hpp"
#include "padme/protein.hpp"
#include "padme/smiles.hpp"

struct padme_molecule {
  padme::MolGraph graph;
};

struct padme_config {
  padme::RunConfig cfg;
};

struct padme_model {
  padme::Checkpoint checkpoint;
};

namespace {

thread_local std::string last_error;

padme_status fail(padme_status s, const std::string& message) {
  last_error = message;
  return s;
}

template <typename Fn>
padme_status guarded(Fn&& fn) {
  last_error.clear();
  try {
    fn();
    return PADME_OK;
  } catch (const padme::SmilesError& e) {
    return fail(PADME_ERR_PARSE, e.what());
  } catch (const padme::IoError& e) {
    return fail(PADME_ERR_IO, e.what());
  } catch (const padme::DataError& e) {
    return fail(PADME_ERR_DATA, e.what());
  } catch (const padme::ShapeError& e) {
    return fail(PADME_ERR_DATA, e.what());
  } catch (const padme::NumericError& e) {
    return fail(PADME_ERR_NUMERIC, e.what());
  } catch (const padme::FormatError& e) {
    return fail(PADME_ERR_FORMAT, e.what());
  } catch (const padme::ConfigError& e) {
    return fail(PADME_ERR_CONFIG, e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(PADME_ERR_IO, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(PADME_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::bad_alloc&) {
    return fail(PADME_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(PADME_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(PADME_ERR_INTERNAL, "unknown error");
  }
}

#define PADME_REQUIRE(cond, what) \
  if (!(cond)) return fail(PADME_ERR_INVALID_ARGUMENT, what)

void copy_out(const std::string& s, char* buf, std::size_t size) {
  if (!buf || size == 0) return;
  const std::size_t n = std::min(s.size(), size - 1);
  std::memcpy(buf, s.data(), n);
  buf[n] = '\0';
}

padme_log_fn log_fn = nullptr;
void* log_user = nullptr;

bool sink_chosen = false;

void install_default_sink() {
  if (sink_chosen) return;
  sink_chosen = true;
  padme::set_log_sink([](padme::LogLevel level, const std::string& m) {
    if (level >= padme::LogLevel::Info) std::fprintf(stderr, "%s\n", m.c_str());
  });
}

}  // namespace

extern "C" {

const char* padme_version(void) { return "1.0.0"; }

const char* padme_last_error(void) { return last_error.c_str(); }

const char* padme_status_name(padme_status status) {
  switch (status) {
    case PADME_OK: return "ok";
    case PADME_ERR_INVALID_ARGUMENT: return "invalid argument";
    case PADME_ERR_PARSE: return "parse error";
    case PADME_ERR_IO: return "i/o error";
    case PADME_ERR_DATA: return "data error";
    case PADME_ERR_NUMERIC: return "numeric error";
    case PADME_ERR_FORMAT: return "format error";
    case PADME_ERR_CONFIG: return "config error";
    case PADME_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

void padme_set_log_callback(padme_log_fn fn, void* user) {
  sink_chosen = true;
  log_fn = fn;
  log_user = user;
  if (!fn) {
    padme::set_log_sink({});
    return;
  }
  padme::set_log_sink([](padme::LogLevel level, const std::string& m) {
    log_fn(static_cast<padme_log_level>(level), m.c_str(), log_user);
  });
}

padme_status padme_molecule_parse(const char* smiles, padme_molecule** out, size_t* error_offset) {
  PADME_REQUIRE(smiles && out, "smiles and out must not be NULL");
  *out = nullptr;
  return guarded([&] {
    try {
      *out = new padme_molecule{padme::parse_smiles(smiles)};
    } catch (const padme::SmilesError& e) {
      if (error_offset) *error_offset = e.offset();
      throw;
    }
  });
}

void padme_molecule_free(padme_molecule* mol) { delete mol; }

padme_status padme_molecule_atom_count(const padme_molecule* mol, size_t* out) {
  PADME_REQUIRE(mol && out, "molecule and out must not be NULL");
  *out = mol->graph.atom_count();
  return PADME_OK;
}

padme_status padme_molecule_bond_count(const padme_molecule* mol, size_t* out) {
  PADME_REQUIRE(mol && out, "molecule and out must not be NULL");
  *out = mol->graph.bond_count();
  return PADME_OK;
}

padme_status padme_molecule_ecfp(const padme_molecule* mol, uint32_t radius, uint32_t n_bits, uint8_t* bytes,
                                 size_t n_bytes) {
  PADME_REQUIRE(mol && bytes, "molecule and buffer must not be NULL");
  PADME_REQUIRE(n_bytes * 8 == n_bits, "buffer must hold exactly n_bits/8 bytes");
  return guarded([&] {
    const padme::Fingerprint fp = padme::ecfp(mol->graph, radius, n_bits);
    std::memset(bytes, 0, n_bytes);
    for (auto bit : fp.on_bits()) bytes[bit / 8] = static_cast<uint8_t>(bytes[bit / 8] | (1u << (bit % 8)));
  });
}

padme_status padme_tanimoto(const uint8_t* a, const uint8_t* b, size_t n_bytes, double* out) {
  PADME_REQUIRE(a && b && out, "arguments must not be NULL");
  std::size_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < n_bytes; ++i) {
    inter += static_cast<std::size_t>(__builtin_popcount(a[i] & b[i]));
    uni += static_cast<std::size_t>(__builtin_popcount(a[i] | b[i]));
  }
  *out = uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
  return PADME_OK;
}

size_t padme_psc_width(void) { return padme::kPscWidth; }

padme_status padme_psc(const char* sequence, int phosphorylated, double* out, size_t n_out) {
  PADME_REQUIRE(sequence && out, "sequence and out must not be NULL");
  PADME_REQUIRE(n_out >= padme::kPscWidth, "output buffer is smaller than the descriptor width");
  return guarded([&] {
    const auto d = padme::psc(sequence, phosphorylated != 0);
    std::copy(d.values().begin(), d.values().end(), out);
  });
}

padme_status padme_config_create(padme_config** out) {
  PADME_REQUIRE(out, "out must not be NULL");
  return guarded([&] { *out = new padme_config{}; });
}

padme_status padme_config_load(const char* path, padme_config** out) {
  PADME_REQUIRE(path && out, "path and out must not be NULL");
  *out = nullptr;
  return guarded([&] { *out = new padme_config{padme::RunConfig::load(path)}; });
}

padme_status padme_config_parse(const char* text, padme_config** out) {
  PADME_REQUIRE(text && out, "text and out must not be NULL");
  *out = nullptr;
  return guarded([&] { *out = new padme_config{padme::RunConfig::parse(text)}; });
}

void padme_config_free(padme_config* cfg) { delete cfg; }

padme_status padme_config_set(padme_config* cfg, const char* key, const char* value) {
  PADME_REQUIRE(cfg && key && value, "arguments must not be NULL");
  return guarded([&] { cfg->cfg.set(key, value); });
}

padme_status padme_config_get(const padme_config* cfg, const char* key, char* buf, size_t size, size_t* needed) {
  PADME_REQUIRE(cfg && key, "config and key must not be NULL");
  return guarded([&] {
    const std::string& v = cfg->cfg.get(key);
    if (needed) *needed = v.size() + 1;
    copy_out(v, buf, size);
  });
}

padme_status padme_config_write(const padme_config* cfg, const char* path) {
  PADME_REQUIRE(cfg && path, "config and path must not be NULL");
  return guarded([&] { cfg->cfg.save(path); });
}

padme_status padme_model_load(const char* checkpoint, padme_model** out) {
  PADME_REQUIRE(checkpoint && out, "checkpoint and out must not be NULL");
  *out = nullptr;
  return guarded([&] { *out = new padme_model{padme::load_checkpoint(checkpoint)}; });
}

void padme_model_free(padme_model* model) { delete model; }

padme_status padme_model_task_count(const padme_model* model, size_t* out) {
  PADME_REQUIRE(model && out, "model and out must not be NULL");
  *out = model->checkpoint.model.config().n_tasks;
  return PADME_OK;
}

padme_status padme_model_predict(const padme_model* model, const char* smiles, const char* protein_id,
                                 const char* sequence, int phosphorylated, double* out, size_t n_out) {
  PADME_REQUIRE(model && smiles && protein_id && out, "arguments must not be NULL");
  const auto& m = model->checkpoint.model;
  PADME_REQUIRE(n_out >= m.config().n_tasks, "output buffer is smaller than the task count");
  const bool needs_sequence = padme::uses_protein(m.config().variant);
  PADME_REQUIRE(!needs_sequence || sequence, "this model needs a protein sequence");
  return guarded([&] {
    const std::string s(smiles);
    padme::parse_smiles(s);
    const padme::ProteinEntry p{protein_id, phosphorylated != 0, needs_sequence ? sequence : ""};
    const auto store = padme::FeatureStore::build(m.config(), std::span(&s, 1), std::span(&p, 1));
    const padme::PairRef ref{0, 0};
    const padme::Tensor pred = m.predict(store, std::span(&ref, 1));
    for (std::size_t t = 0; t < m.config().n_tasks; ++t) out[t] = pred.at(0, t);
  });
}

padme_status padme_featurize(const padme_config* cfg, const char* data_dir, const char* out_dir) {
  PADME_REQUIRE(cfg && data_dir && out_dir, "arguments must not be NULL");
  install_default_sink();
  return guarded([&] { padme::run_featurize(cfg->cfg, data_dir, out_dir); });
}

padme_status padme_split(const padme_config* cfg, const char* data_dir, const char* out_dir, const char* scheme,
                         size_t k, uint64_t seed, char* path_buf, size_t path_size) {
  PADME_REQUIRE(cfg && data_dir && out_dir && scheme, "arguments must not be NULL");
  install_default_sink();
  return guarded([&] {
    const auto path = padme::run_split(cfg->cfg, data_dir, out_dir, padme::parse_scheme(scheme), k, seed);
    copy_out(path.string(), path_buf, path_size);
  });
}

padme_status padme_train(const padme_config* cfg, const char* data_dir, const char* out_dir) {
  PADME_REQUIRE(cfg && data_dir && out_dir, "arguments must not be NULL");
  install_default_sink();
  return guarded([&] { padme::run_train(cfg->cfg, data_dir, out_dir); });
}

padme_status padme_predict(const char* checkpoint, const char* input, const char* output, const char* sequences,
                           const char* ad_from) {
  PADME_REQUIRE(checkpoint && input && output, "arguments must not be NULL");
  install_default_sink();
  return guarded([&] {
    padme::PredictOptions o;
    if (sequences) o.sequences = sequences;
    if (ad_from) o.ad_from = ad_from;
    padme::run_predict(checkpoint, input, output, o);
  });
}

padme_status padme_evaluate(const char* predictions, const char* report, char* table, size_t table_size) {
  PADME_REQUIRE(predictions && report, "arguments must not be NULL");
  install_default_sink();
  return guarded([&] {
    const auto r = padme::run_evaluate(predictions, report);
    copy_out(padme::report_table(r), table, table_size);
  });
}

padme_status padme_cv(const padme_config* cfg, const char* data_dir, const char* out_dir) {
  PADME_REQUIRE(cfg && data_dir && out_dir, "arguments must not be NULL");
  install_default_sink();
  return guarded([&] { padme::run_cv(cfg->cfg, data_dir, out_dir); });
}

padme_status padme_tune(const padme_config* cfg, const char* data_dir, const char* out_dir, const char* space_file) {
  PADME_REQUIRE(cfg && data_dir && out_dir, "arguments must not be NULL");
  install_default_sink();
  return guarded([&] {
    std::string space = space_file ? space_file : cfg->cfg.get("tune.space");
    if (space.empty()) throw padme::ConfigError("no search space file given");
    padme::run_tune(cfg->cfg, data_dir, out_dir, padme::SearchSpace::load(space));
  });
}

padme_status padme_smoke(const char* data_dir, const char* out_dir, uint64_t seed, int* passed) {
  PADME_REQUIRE(data_dir && out_dir && passed, "arguments must not be NULL");
  install_default_sink();
  *passed = 0;
  return guarded([&] {
    const auto r = padme::run_smoke(data_dir, out_dir, seed);
    *passed = r.ok ? 1 : 0;
    if (!r.ok) {
      const auto& s = r.stages.back();
      last_error = "stage " + s.name + " failed: " + s.detail;
    }
  });
}

}  // extern "C"
