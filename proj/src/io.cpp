#include "io.hpp"

#include <cerrno>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace rubato::io {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

double parse_num(const std::string& s, const std::string& ctx) {
  try {
    size_t pos = 0;
    double v = std::stod(s, &pos);
    // allow simple fractions like 1/3 for note lengths
    if (pos < s.size() && s[pos] == '/') {
      size_t p2 = 0;
      double den = std::stod(s.substr(pos + 1), &p2);
      v /= den;
    }
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("cannot parse number '" + s + "' in " + ctx);
  }
}

std::vector<std::vector<std::string>> read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    rows.push_back(split_csv(line));
  }
  if (rows.empty()) throw std::runtime_error("empty file " + path);
  return rows;
}

std::string stem_of(const std::string& path) {
  size_t slash = path.find_last_of("/\\");
  std::string base = slash == std::string::npos ? path : path.substr(slash + 1);
  size_t dot = base.find_last_of('.');
  return dot == std::string::npos ? base : base.substr(0, dot);
}

}  // namespace

void atomic_write(const std::string& path, const std::string& content) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp);
    out << content;
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    throw std::runtime_error("rename failed for " + path + ": " +
                             std::strerror(errno));
  }
}

PerformanceRecord ingest(const std::string& path, IngestFormat format,
                         int beats_per_measure) {
  auto rows = read_csv(path);
  PerformanceRecord rec;
  rec.id = stem_of(path);

  std::vector<tempo::ScoreEvent> events;
  std::vector<double> values;  // onset_s or tempo_bpm
  std::vector<double> loud;
  for (size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    std::string ctx = path + " row " + std::to_string(r + 1);
    if (row.size() < 5) throw std::runtime_error("too few columns in " + ctx);
    tempo::ScoreEvent ev;
    ev.index = int(parse_num(row[0], ctx));
    ev.measure = int(parse_num(row[1], ctx));
    ev.beat = parse_num(row[2], ctx);
    ev.l = parse_num(row[3], ctx);
    if (!(ev.l > 0.0)) {
      throw std::runtime_error("zero/negative note length in " + ctx);
    }
    events.push_back(ev);
    values.push_back(parse_num(row[4], ctx));
    if (row.size() > 5 && !row[5].empty()) loud.push_back(parse_num(row[5], ctx));
  }

  if (format == IngestFormat::Tempos) {
    rec.score = events;
    rec.y = values;
    for (double v : rec.y) {
      if (!(v > 0.0)) throw std::runtime_error("nonpositive tempo in " + path);
    }
  } else {
    // the final onset closes the last note: y has one fewer entry
    if (events.size() < 2) throw std::runtime_error("need >= 2 onsets in " + path);
    for (size_t i = 0; i + 1 < values.size(); ++i) {
      double gap = values[i + 1] - values[i];
      if (!(gap > 0.0)) {
        throw std::runtime_error("non-monotone onsets at row " +
                                 std::to_string(i + 2) + " in " + path);
      }
      rec.y.push_back(60.0 * beats_per_measure * events[i].l / gap);
    }
    rec.score.assign(events.begin(), events.end() - 1);
    rec.onsets = values;
  }
  rec.loudness = loud;
  return rec;
}

std::vector<tempo::ScoreEvent> load_score(const std::string& path) {
  auto rows = read_csv(path);
  std::vector<tempo::ScoreEvent> score;
  for (size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    std::string ctx = path + " row " + std::to_string(r + 1);
    if (row.size() < 4) throw std::runtime_error("too few columns in " + ctx);
    tempo::ScoreEvent ev;
    ev.index = int(parse_num(row[0], ctx));
    ev.measure = int(parse_num(row[1], ctx));
    ev.beat = parse_num(row[2], ctx);
    ev.l = parse_num(row[3], ctx);
    if (!(ev.l > 0.0)) throw std::runtime_error("zero/negative note length in " + ctx);
    score.push_back(ev);
  }
  return score;
}

void save_score(const std::vector<tempo::ScoreEvent>& score,
                const std::string& path) {
  std::string out = "note_index,measure,beat,l\n";
  for (const auto& ev : score) {
    out += std::to_string(ev.index) + "," + std::to_string(ev.measure) + "," +
           fmt(ev.beat) + "," + fmt(ev.l) + "\n";
  }
  atomic_write(path, out);
}

void save_tempos(const PerformanceRecord& rec, const std::string& path) {
  std::string out = "note_index,measure,beat,l,tempo_bpm\n";
  for (size_t i = 0; i < rec.score.size(); ++i) {
    const auto& ev = rec.score[i];
    out += std::to_string(ev.index) + "," + std::to_string(ev.measure) + "," +
           fmt(ev.beat) + "," + fmt(ev.l) + "," + fmt(rec.y[i]) + "\n";
  }
  atomic_write(path, out);
}

namespace {

std::string theta_text(const tempo::Theta& th) {
  std::string s;
  auto kv = [&](const char* k, double v) {
    s += std::string(k) + ": " + fmt(v) + "\n";
  };
  kv("sigma2_eps", th.sigma2_eps);
  kv("mu_tempo", th.mu_tempo);
  kv("mu_acc", th.mu_acc);
  kv("mu_stress", th.mu_stress);
  kv("sigma2_tempo", th.sigma2_tempo);
  kv("p11", th.row1[0]);
  kv("p12", th.row1[1]);
  kv("p22", th.row2[1]);
  kv("p31", th.row3[0]);
  kv("p13", th.row1[2]);
  kv("p21", th.row2[0]);
  kv("p32", th.row3[1]);
  return s;
}

tempo::Theta theta_from_kv(
    const std::vector<std::pair<std::string, std::string>>& kv,
    const std::string& path) {
  auto get = [&](const std::string& key) {
    for (const auto& [k, v] : kv) {
      if (k == key) return parse_num(v, path);
    }
    throw std::runtime_error("missing key '" + key + "' in " + path);
  };
  tempo::Theta th;
  th.sigma2_eps = get("sigma2_eps");
  th.mu_tempo = get("mu_tempo");
  th.mu_acc = get("mu_acc");
  th.mu_stress = get("mu_stress");
  th.sigma2_tempo = get("sigma2_tempo");
  double p11 = get("p11"), p12 = get("p12"), p13 = get("p13");
  double p21 = get("p21"), p22 = get("p22");
  double p31 = get("p31"), p32 = get("p32");
  th.row1 = {p11, p12, p13, 1.0 - p11 - p12 - p13};
  th.row2 = {p21, p22, 1.0 - p21 - p22};
  th.row3 = {p31, p32, 1.0 - p31 - p32};
  return th;
}

std::vector<std::pair<std::string, std::string>> read_kv(
    std::istream& in, const std::string& terminator = "") {
  std::vector<std::pair<std::string, std::string>> kv;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line == terminator) break;
    if (line.empty() || line[0] == '#') continue;
    size_t colon = line.find(':');
    if (colon == std::string::npos) continue;
    std::string key = line.substr(0, colon);
    std::string val = line.substr(colon + 1);
    while (!val.empty() && val.front() == ' ') val.erase(val.begin());
    kv.emplace_back(key, val);
  }
  return kv;
}

}  // namespace

void save_theta(const tempo::Theta& th, const std::string& path) {
  atomic_write(path, "# rubato theta v1\n" + theta_text(th));
}

tempo::Theta load_theta(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return theta_from_kv(read_kv(in), path);
}

void save_fit(const estimate::FittedPerformance& fp,
              const PerformanceRecord& rec, const RunMeta& meta,
              const std::string& path) {
  std::string s = "# rubato fit v1\n";
  s += "id: " + rec.id + "\n";
  s += "version: " + meta.version + "\n";
  s += "seed: " + std::to_string(meta.seed) + "\n";
  s += "beam: " + std::to_string(meta.beam) + "\n";
  s += "restarts: " + std::to_string(meta.restarts) + "\n";
  s += theta_text(fp.theta);
  s += "loglik: " + fmt(fp.loglik) + "\n";
  s += "log_prior: " + fmt(fp.log_prior) + "\n";
  s += "objective: " + fmt(fp.objective) + "\n";
  s += "notes: " + std::to_string(fp.path.size()) + "\n";
  s += "path:\n";
  for (size_t i = 0; i < fp.path.size(); ++i) {
    s += std::to_string(int(fp.path[i])) + "," +
         std::to_string(fp.behaviors[i]) + "," + fmt(fp.smoothed_tempo[i]) +
         "\n";
  }
  atomic_write(path, s);
}

LoadedFit load_fit(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  auto kv = read_kv(in, "path:");
  LoadedFit lf;
  for (const auto& [k, v] : kv) {
    if (k == "id") lf.id = v;
    if (k == "version") lf.meta.version = v;
    if (k == "seed") lf.meta.seed = uint64_t(std::stoull(v));
    if (k == "beam") lf.meta.beam = std::stoi(v);
    if (k == "restarts") lf.meta.restarts = std::stoi(v);
  }
  lf.fit.theta = theta_from_kv(kv, path);
  for (const auto& [k, v] : kv) {
    if (k == "loglik") lf.fit.loglik = parse_num(v, path);
    if (k == "log_prior") lf.fit.log_prior = parse_num(v, path);
    if (k == "objective") lf.fit.objective = parse_num(v, path);
  }
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split_csv(line);
    if (cells.size() != 3) throw std::runtime_error("bad path line in " + path);
    lf.fit.path.push_back(tempo::Node(std::stoi(cells[0])));
    lf.fit.behaviors.push_back(std::stoi(cells[1]));
    lf.fit.smoothed_tempo.push_back(parse_num(cells[2], path));
  }
  return lf;
}

void save_distance_matrix(const cluster::DistanceMatrix& dm,
                          const std::string& path) {
  std::string s = "label";
  for (const auto& l : dm.labels) s += "," + l;
  s += "\n";
  for (size_t i = 0; i < dm.labels.size(); ++i) {
    s += dm.labels[i];
    for (double v : dm.d[i]) s += "," + fmt(v);
    s += "\n";
  }
  atomic_write(path, s);
}

cluster::DistanceMatrix load_distance_matrix(const std::string& path) {
  auto rows = read_csv(path);
  cluster::DistanceMatrix dm;
  dm.labels.assign(rows[0].begin() + 1, rows[0].end());
  size_t n = dm.labels.size();
  if (rows.size() != n + 1) {
    throw std::runtime_error("distance matrix dimension mismatch in " + path);
  }
  dm.d.assign(n, std::vector<double>(n));
  for (size_t i = 0; i < n; ++i) {
    if (rows[i + 1].size() != n + 1) {
      throw std::runtime_error("distance matrix dimension mismatch in " + path);
    }
    for (size_t j = 0; j < n; ++j) {
      dm.d[i][j] = parse_num(rows[i + 1][j + 1], path);
    }
  }
  return dm;
}

void save_dendrogram(const cluster::Dendrogram& dend,
                     const std::vector<std::string>& labels,
                     const std::string& path) {
  std::string s = "# leaves in order; merge i creates cluster leaves+i\n";
  s += "leaf,label\n";
  for (size_t i = 0; i < labels.size(); ++i) {
    s += std::to_string(i) + "," + labels[i] + "\n";
  }
  s += "merge,a,b,height\n";
  for (size_t m = 0; m < dend.merges.size(); ++m) {
    s += std::to_string(m) + "," + std::to_string(dend.merges[m].a) + "," +
         std::to_string(dend.merges[m].b) + "," + fmt(dend.merges[m].height) +
         "\n";
  }
  atomic_write(path, s);
}

void save_cluster_labels(const std::vector<std::string>& labels,
                         const std::vector<int>& assignment,
                         const std::vector<std::string>& removed,
                         const std::string& path) {
  std::string s = "label,cluster\n";
  for (size_t i = 0; i < labels.size(); ++i) {
    s += labels[i] + "," + std::to_string(assignment[i]) + "\n";
  }
  for (const auto& l : removed) s += l + ",other\n";
  atomic_write(path, s);
}

void export_curve(const estimate::FittedPerformance& fp,
                  const PerformanceRecord& rec, const std::string& path) {
  std::string s = "note_index,measure,observed_tempo,smoothed_tempo,behavior\n";
  for (size_t i = 0; i < rec.y.size(); ++i) {
    s += std::to_string(rec.score[i].index) + "," +
         std::to_string(rec.score[i].measure) + "," + fmt(rec.y[i]) + "," +
         fmt(fp.smoothed_tempo[i]) + "," + std::to_string(fp.behaviors[i]) +
         "\n";
  }
  atomic_write(path, s);
}

}  // namespace rubato::io
