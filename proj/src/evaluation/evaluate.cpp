#include "kpst/evaluation/evaluate.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "json.hpp"

#include "kpst/core/errors.hpp"
#include "kpst/data/image_io.hpp"
#include "kpst/networks/checkpoint.hpp"
#include "kpst/networks/generator.hpp"
#include "kpst/training/trainer.hpp"

namespace kpst::evaluation {

namespace {

namespace fs = std::filesystem;

void write_text_atomic(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << text;
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move " + tmp.string() + " into place: " + ec.message());
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

struct TestImage {
  std::string id;
  data::RawImage raw;
  Tensor pixels;  // normalized {3,H,W}
};

std::vector<TestImage> load_side(const data::DatasetManifest& manifest,
                                 const std::vector<std::string>& ids, char domain) {
  std::vector<TestImage> out;
  out.reserve(ids.size());
  for (const auto& id : ids) {
    TestImage t;
    t.id = id;
    t.raw = data::read_image(manifest.path_of(id, domain));
    t.pixels = data::normalize(t.raw, id).pixels;
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace

BalanceColumn balance_column(const std::array<double, 5>& values) {
  BalanceColumn col;
  col.value = values;
  col.w_avg = weighted_mean(std::vector<double>(values.begin(), values.end())).w_avg;
  for (size_t i = 0; i < values.size(); ++i) col.error[i] = balance_error(col.w_avg, values[i]);
  return col;
}

std::array<double, 5> AblationSet::e_psnr() const {
  std::array<double, 5> out{};
  for (size_t i = 0; i < out.size(); ++i) out[i] = p_content.error[i] + p_style.error[i];
  return out;
}

std::array<double, 5> AblationSet::e_ssim() const {
  std::array<double, 5> out{};
  for (size_t i = 0; i < out.size(); ++i) out[i] = s_content.error[i] + s_style.error[i];
  return out;
}

TestsetEvaluation evaluate_testset(const std::filesystem::path& models_root,
                                   const data::DatasetManifest& manifest,
                                   const std::filesystem::path& out_dir) {
  manifest.validate();
  if (manifest.test_x.empty() || manifest.test_y.empty()) {
    throw DataError("test set is empty in at least one domain");
  }
  const auto xs = load_side(manifest, manifest.test_x, 'x');
  const auto ys = load_side(manifest, manifest.test_y, 'y');

  TestsetEvaluation result;
  std::ostringstream scatter_psnr, scatter_ssim;
  scatter_psnr << "variant,pair_id,content,style\n";
  scatter_ssim << "variant,pair_id,content,style\n";

  for (const auto& arm : training::ablation_variants()) {
    const fs::path ckpt = training::latest_checkpoint(models_root / arm.slug);
    if (ckpt.empty()) {
      std::cerr << "warning: no checkpoint under " << (models_root / arm.slug).string()
                << "; skipping variant " << arm.slug << "\n";
      result.skipped.push_back(arm.slug);
      continue;
    }
    networks::Generator g;
    networks::load_checkpoint(ckpt, g, nullptr, nullptr, nullptr, nullptr, nullptr);

    VariantEvaluation ev;
    ev.slug = arm.slug;
    std::ostringstream csv;
    csv << "pair_id,P_content,P_style,S_content,S_style\n";
    nn::NoGradGuard ng;
    for (const auto& x : xs) {
      const nn::Var xv(x.pixels);
      for (const auto& y : ys) {
        const auto out = g.forward(xv, nn::Var(y.pixels));
        const data::RawImage stylized = data::denormalize(out.x_y.val());
        MetricRecord r;
        r.pair_id = x.id + "__" + y.id;
        r.p_content = psnr(stylized, x.raw);
        r.p_style = psnr(stylized, y.raw);
        r.s_content = ssim(stylized, x.raw);
        r.s_style = ssim(stylized, y.raw);
        csv << r.pair_id << "," << num(r.p_content) << "," << num(r.p_style) << ","
            << num(r.s_content) << "," << num(r.s_style) << "\n";
        scatter_psnr << arm.slug << "," << r.pair_id << "," << num(r.p_content) << ","
                     << num(r.p_style) << "\n";
        scatter_ssim << arm.slug << "," << r.pair_id << "," << num(r.s_content) << ","
                     << num(r.s_style) << "\n";
        ev.mean_p_content += r.p_content;
        ev.mean_p_style += r.p_style;
        ev.mean_s_content += r.s_content;
        ev.mean_s_style += r.s_style;
        ev.records.push_back(std::move(r));
      }
    }
    const double n = static_cast<double>(ev.records.size());
    ev.mean_p_content /= n;
    ev.mean_p_style /= n;
    ev.mean_s_content /= n;
    ev.mean_s_style /= n;
    write_text_atomic(out_dir / ("metrics_" + arm.slug + ".csv"), csv.str());
    result.variants.push_back(std::move(ev));
  }

  if (result.variants.empty()) {
    throw DataError("no study arm had a usable model under " + models_root.string());
  }
  write_text_atomic(out_dir / "scatter_psnr.csv", scatter_psnr.str());
  write_text_atomic(out_dir / "scatter_ssim.csv", scatter_ssim.str());

  nlohmann::ordered_json summary;
  summary["pairs_per_variant"] =
      static_cast<int64_t>(manifest.test_x.size() * manifest.test_y.size());
  summary["skipped"] = result.skipped;
  nlohmann::ordered_json means;
  for (const auto& ev : result.variants) {
    means[ev.slug] = {{"P_content", ev.mean_p_content},
                      {"P_style", ev.mean_p_style},
                      {"S_content", ev.mean_s_content},
                      {"S_style", ev.mean_s_style}};
  }
  summary["means"] = means;

  if (result.variants.size() == 5) {
    AblationSet set;
    std::array<double, 5> pc{}, ps{}, sc{}, ss{};
    for (size_t i = 0; i < 5; ++i) {
      set.variant[i] = result.variants[i].slug;
      pc[i] = result.variants[i].mean_p_content;
      ps[i] = result.variants[i].mean_p_style;
      sc[i] = result.variants[i].mean_s_content;
      ss[i] = result.variants[i].mean_s_style;
    }
    set.p_content = balance_column(pc);
    set.p_style = balance_column(ps);
    set.s_content = balance_column(sc);
    set.s_style = balance_column(ss);

    auto table = [&set](const BalanceColumn& content, const BalanceColumn& style,
                        const char* content_row, const char* style_row,
                        const char* combined_row, const std::array<double, 5>& combined) {
      nlohmann::ordered_json t;
      auto row = [&set](const std::array<double, 5>& v) {
        nlohmann::ordered_json r;
        for (size_t i = 0; i < v.size(); ++i) r[set.variant[i]] = v[i];
        return r;
      };
      t[content_row] = row(content.value);
      t[style_row] = row(style.value);
      t["E_Content"] = row(content.error);
      t["E_Style"] = row(style.error);
      t[combined_row] = row(combined);
      t["w_avg"] = {{content_row, content.w_avg}, {style_row, style.w_avg}};
      return t;
    };
    summary["psnr"] =
        table(set.p_content, set.p_style, "P_Content", "P_Style", "E_PSNR", set.e_psnr());
    summary["ssim"] =
        table(set.s_content, set.s_style, "S_Content", "S_Style", "E_SSIM", set.e_ssim());
    result.balance = set;
  }

  write_text_atomic(out_dir / "summary.json", summary.dump(2) + "\n");
  return result;
}

}  // namespace kpst::evaluation
