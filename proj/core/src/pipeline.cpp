#include "nrel/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "nrel/errors.hpp"
#include "nrel/metrics.hpp"
#include "nrel/net.hpp"
#include "nrel/rng.hpp"

namespace nrel {

namespace {

double pick_opt_lr(const EditConfig& cfg, const DenoiserBackend& backend) {
  if (cfg.opt_lr > 0.0) return cfg.opt_lr;
  return dynamic_cast<const NetBackend*>(&backend) != nullptr ? 1e-3 : 1e-2;
}

// Rethrow stage failures with the stage named, preserving the error family.
template <typename F>
auto run_stage(const char* stage, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const UnsupportedBackendError& ex) {
    throw UnsupportedBackendError(std::string(stage) + ": " + ex.what());
  } catch (const NumericDivergenceError& ex) {
    throw NumericDivergenceError(std::string(stage) + ": " + ex.what());
  } catch (const std::invalid_argument& ex) {
    throw std::invalid_argument(std::string(stage) + ": " + ex.what());
  } catch (const std::exception& ex) {
    throw std::runtime_error(std::string(stage) + ": " + ex.what());
  }
}

void fill_metrics(EditResult& res, double work_evals, const Vec& x_input,
                  const std::vector<std::string>& src_prompt,
                  const std::vector<std::string>& tgt_prompt,
                  const PromptVocabulary& vocab,
                  const DenoiserBackend& backend,
                  const NoiseSchedule& sched) {
  res.metrics.alpha = res.config.alpha;
  res.metrics.rho = res.config.rho;
  res.metrics.seed = res.config.seed;
  res.metrics.mse_input = mse(res.x_edit, x_input);
  res.metrics.psnr_input = psnr(res.x_edit, x_input, kPsnrRange);
  res.metrics.target_alignment =
      target_alignment(res.x_edit, tgt_prompt, vocab, backend, sched);
  res.metrics.source_alignment =
      target_alignment(res.x_edit, src_prompt, vocab, backend, sched);
  const Vec& errs = res.inversion.per_step_pivot_error;
  res.metrics.pivot_error_max =
      errs.empty() ? 0.0 : *std::max_element(errs.begin(), errs.end());
  res.metrics.runtime_ms = work_evals / 1000.0;
}

InversionResult invert_for(const Vec& x_input, const Embedding& e_src,
                           const DenoiserBackend& backend,
                           const NoiseSchedule& sched, const StepPlan& plan,
                           const EditConfig& cfg) {
  if (cfg.inversion_kind == InversionKind::NullText) {
    return null_text_invert(x_input, e_src, backend, sched, plan,
                            cfg.guidance, cfg.nti_inner_steps, cfg.nti_lr);
  }
  return ddim_invert(x_input, e_src, backend, sched, plan);
}

struct ScheduledSample {
  SamplingOutput out;
  double work = 0.0;  // backend evaluations consumed by the sampling call
};

ScheduledSample sample_with_schedule(const Vec& z_start,
                                     const Embedding& e_src,
                                     const Embedding& e_int,
                                     const InversionResult& inv,
                                     const DenoiserBackend& backend,
                                     const NoiseSchedule& sched,
                                     const StepPlan& plan,
                                     const EditConfig& cfg) {
  const auto cond = embedding_schedule(e_src, e_int, cfg.rho, plan);
  std::vector<std::string> labels(cond.size());
  for (std::size_t i = 0; i < cond.size(); ++i) {
    labels[i] = (cond[i] == &e_src) ? "e_src" : "e_int";
  }
  std::vector<const Embedding*> uncond;
  if (inv.kind == InversionKind::NullText) {
    uncond.reserve(inv.null_embeddings.size());
    for (const Embedding& ne : inv.null_embeddings) uncond.push_back(&ne);
  }
  const std::uint64_t before = backend.eval_count();
  ScheduledSample s;
  s.out = cfg_sample(z_start, cond, labels, uncond, backend, sched, plan,
                     cfg.guidance);
  s.work = static_cast<double>(backend.eval_count() - before);
  return s;
}

}  // namespace

void EditConfig::validate() const {
  if (!(rho >= 0.0 && rho <= 1.0)) {
    throw std::invalid_argument("edit config: rho must be in [0, 1]");
  }
  if (steps < 1) {
    throw std::invalid_argument("edit config: steps must be >= 1");
  }
  if (!(guidance >= 0.0)) {
    throw std::invalid_argument("edit config: guidance must be >= 0");
  }
  if (opt_iterations < 0) {
    throw std::invalid_argument("edit config: opt_iterations must be >= 0");
  }
  if (opt_batch < 1) {
    throw std::invalid_argument("edit config: opt_batch must be >= 1");
  }
  if (nti_inner_steps < 0) {
    throw std::invalid_argument("edit config: nti_inner_steps must be >= 0");
  }
}

std::vector<const Embedding*> embedding_schedule(const Embedding& e_src,
                                                 const Embedding& e_int,
                                                 double rho,
                                                 const StepPlan& plan) {
  if (!(rho >= 0.0 && rho <= 1.0)) {
    throw std::invalid_argument("embedding_schedule: rho must be in [0, 1]");
  }
  const int S = plan.steps;
  const int k = static_cast<int>(
      std::floor(rho * static_cast<double>(S) + 0.5));  // ties round up
  std::vector<const Embedding*> out(static_cast<std::size_t>(S));
  for (int i = 0; i < S; ++i) {
    out[static_cast<std::size_t>(i)] = (i < k) ? &e_src : &e_int;
  }
  return out;
}

EditResult edit(const Vec& x_input, const std::vector<std::string>& src_prompt,
                const std::vector<std::string>& tgt_prompt,
                const PromptVocabulary& vocab, const DenoiserBackend& backend,
                const NoiseSchedule& sched, const EditConfig& cfg) {
  cfg.validate();
  if (static_cast<int>(x_input.size()) != backend.data_dim()) {
    throw std::invalid_argument("edit: input dimension mismatch");
  }
  const Embedding e_src = encode_prompt(vocab, src_prompt);
  const Embedding e_tgt = encode_prompt(vocab, tgt_prompt);
  const StepPlan plan = make_plan(cfg.steps, sched);

  EditResult res;
  res.config = cfg;

  const std::uint64_t opt_before = backend.eval_count();
  OptimizationReport report =
      run_stage("embedding-optimization stage", [&] {
        return optimize_embedding(x_input, e_tgt, backend, sched,
                                  cfg.opt_iterations,
                                  pick_opt_lr(cfg, backend), cfg.seed,
                                  cfg.opt_batch);
      });
  const double opt_work =
      static_cast<double>(backend.eval_count() - opt_before);
  res.e_opt = report.e_opt;

  const std::uint64_t inv_before = backend.eval_count();
  res.inversion = run_stage("inversion stage", [&] {
    return invert_for(x_input, e_src, backend, sched, plan, cfg);
  });
  const double inv_work =
      static_cast<double>(backend.eval_count() - inv_before);

  res.e_int = interpolate(e_tgt, res.e_opt, cfg.alpha);
  ScheduledSample s = run_stage("sampling stage", [&] {
    return sample_with_schedule(res.inversion.z_T_star, e_src, res.e_int,
                                res.inversion, backend, sched, plan, cfg);
  });
  res.x_edit = s.out.x0;
  res.trajectory = s.out.trajectory;

  fill_metrics(res, opt_work + inv_work + s.work, x_input, src_prompt,
               tgt_prompt, vocab, backend, sched);
  return res;
}

std::vector<EditResult> sweep(const Vec& x_input,
                              const std::vector<std::string>& src_prompt,
                              const std::vector<std::string>& tgt_prompt,
                              const PromptVocabulary& vocab,
                              const DenoiserBackend& backend,
                              const NoiseSchedule& sched,
                              const std::vector<double>& alphas,
                              const std::vector<double>& rhos,
                              const std::vector<std::uint64_t>& seeds,
                              const EditConfig& base_cfg) {
  if (alphas.empty() || rhos.empty() || seeds.empty()) {
    throw std::invalid_argument("sweep: empty grid");
  }
  if (static_cast<int>(x_input.size()) != backend.data_dim()) {
    throw std::invalid_argument("sweep: input dimension mismatch");
  }
  const Embedding e_src = encode_prompt(vocab, src_prompt);
  const Embedding e_tgt = encode_prompt(vocab, tgt_prompt);
  const StepPlan plan = make_plan(base_cfg.steps, sched);

  // Shared inversion: independent of alpha, rho, and seed.
  InversionResult inv;
  double inv_work = 0.0;
  bool inv_ok = true;
  std::string inv_error;
  {
    const std::uint64_t before = backend.eval_count();
    try {
      inv = run_stage("inversion stage", [&] {
        return invert_for(x_input, e_src, backend, sched, plan, base_cfg);
      });
    } catch (const std::exception& ex) {
      inv_ok = false;
      inv_error = ex.what();
    }
    inv_work = static_cast<double>(backend.eval_count() - before);
  }

  // One embedding optimization per seed.
  struct OptCell {
    Embedding e_opt;
    double work = 0.0;
    bool ok = true;
    std::string error;
  };
  std::vector<OptCell> opt_cells(seeds.size());
  for (std::size_t si = 0; si < seeds.size(); ++si) {
    const std::uint64_t before = backend.eval_count();
    try {
      EditConfig c = base_cfg;
      c.seed = seeds[si];
      opt_cells[si].e_opt = run_stage("embedding-optimization stage", [&] {
                              return optimize_embedding(
                                  x_input, e_tgt, backend, sched,
                                  c.opt_iterations, pick_opt_lr(c, backend),
                                  c.seed, c.opt_batch);
                            }).e_opt;
    } catch (const std::exception& ex) {
      opt_cells[si].ok = false;
      opt_cells[si].error = ex.what();
    }
    opt_cells[si].work = static_cast<double>(backend.eval_count() - before);
  }

  std::vector<EditResult> results;
  results.reserve(alphas.size() * rhos.size() * seeds.size());
  for (double alpha : alphas) {
    for (double rho : rhos) {
      for (std::size_t si = 0; si < seeds.size(); ++si) {
        EditConfig cell = base_cfg;
        cell.alpha = alpha;
        cell.rho = rho;
        cell.seed = seeds[si];
        EditResult r;
        r.config = cell;
        r.metrics.alpha = alpha;
        r.metrics.rho = rho;
        r.metrics.seed = cell.seed;
        try {
          cell.validate();
          if (!inv_ok) throw std::runtime_error(inv_error);
          if (!opt_cells[si].ok) throw std::runtime_error(opt_cells[si].error);
          r.e_opt = opt_cells[si].e_opt;
          r.inversion = inv;
          r.e_int = interpolate(e_tgt, r.e_opt, alpha);
          ScheduledSample s = run_stage("sampling stage", [&] {
            return sample_with_schedule(inv.z_T_star, e_src, r.e_int, inv,
                                        backend, sched, plan, cell);
          });
          r.x_edit = s.out.x0;
          r.trajectory = s.out.trajectory;
          fill_metrics(r, opt_cells[si].work + inv_work + s.work, x_input,
                       src_prompt, tgt_prompt, vocab, backend, sched);
        } catch (const std::exception& ex) {
          r.failed = true;
          r.error = ex.what();
        }
        results.push_back(std::move(r));
      }
    }
  }
  return results;
}

EditResult imagic_pipeline(const Vec& x_input,
                           const std::vector<std::string>& src_prompt,
                           const std::vector<std::string>& tgt_prompt,
                           const PromptVocabulary& vocab,
                           const DenoiserBackend& backend,
                           const NoiseSchedule& sched, const EditConfig& cfg,
                           int finetune_iterations) {
  cfg.validate();
  if (finetune_iterations < 0) {
    throw std::invalid_argument("imagic_pipeline: negative finetune budget");
  }
  if (dynamic_cast<const NetBackend*>(&backend) == nullptr) {
    throw UnsupportedBackendError(
        "imagic_pipeline: trainable backend required");
  }
  if (static_cast<int>(x_input.size()) != backend.data_dim()) {
    throw std::invalid_argument("imagic_pipeline: input dimension mismatch");
  }
  const Embedding e_tgt = encode_prompt(vocab, tgt_prompt);
  const StepPlan plan = make_plan(cfg.steps, sched);

  EditResult res;
  res.config = cfg;

  const std::uint64_t opt_before = backend.eval_count();
  OptimizationReport report =
      run_stage("embedding-optimization stage", [&] {
        return optimize_embedding(x_input, e_tgt, backend, sched,
                                  cfg.opt_iterations,
                                  pick_opt_lr(cfg, backend), cfg.seed,
                                  cfg.opt_batch);
      });
  const double opt_work =
      static_cast<double>(backend.eval_count() - opt_before);
  res.e_opt = report.e_opt;

  FinetuneResult ft = run_stage("finetuning stage", [&] {
    return imagic_finetune(backend, x_input, res.e_opt, sched,
                           finetune_iterations, 1e-3, cfg.seed + 1);
  });
  const NetBackend edited(std::move(ft.net));

  res.e_int = interpolate(e_tgt, res.e_opt, cfg.alpha);
  Rng rng(cfg.seed + 2);
  const Vec z_fresh = rng.normal_vec(x_input.size());
  const std::size_t steps = static_cast<std::size_t>(plan.steps);
  std::vector<const Embedding*> cond(steps, &res.e_int);
  std::vector<std::string> labels(steps, "e_int");
  const std::uint64_t sample_before = edited.eval_count();
  SamplingOutput s = run_stage("sampling stage", [&] {
    return cfg_sample(z_fresh, cond, labels, {}, edited, sched, plan,
                      cfg.guidance);
  });
  const double sample_work =
      static_cast<double>(edited.eval_count() - sample_before);
  res.x_edit = s.x0;
  res.trajectory = s.trajectory;

  // Each finetune iteration is one forward+backward on the copied model;
  // charge it as one evaluation of work.
  fill_metrics(res,
               opt_work + static_cast<double>(finetune_iterations) +
                   sample_work,
               x_input, src_prompt, tgt_prompt, vocab, backend, sched);
  return res;
}

}  // namespace nrel
