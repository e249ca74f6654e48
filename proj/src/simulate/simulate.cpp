#include "simulate/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "util/csv.hpp"
#include "util/errors.hpp"
#include "util/kvfile.hpp"
#include "util/rng.hpp"

namespace linkmse {

namespace {

const std::vector<std::string> kGivenNames = {
    "JOSE", "MARIA", "JUAN", "ANA", "CARLOS", "ROSA", "FRANCISCO", "CARMEN",
    "ANTONIO", "TERESA", "MANUEL", "JUANA", "PEDRO", "FRANCISCA", "MIGUEL",
    "ISABEL", "RAFAEL", "MARTA", "SALVADOR", "GLORIA", "RICARDO", "ELENA",
    "ROBERTO", "SILVIA", "FERNANDO", "LUCIA", "ALFREDO", "SONIA", "ERNESTO",
    "PATRICIA", "RODOLFO", "BLANCA", "GUSTAVO", "NORMA", "ARMANDO", "ALICIA",
    "HECTOR", "DORA", "OSCAR", "IRMA"};

const std::vector<std::string> kFamilyNames = {
    "HERNANDEZ", "GARCIA", "MARTINEZ", "LOPEZ", "GONZALEZ", "RODRIGUEZ",
    "PEREZ", "SANCHEZ", "RAMIREZ", "FLORES", "RIVERA", "GOMEZ", "DIAZ",
    "CRUZ", "MORALES", "REYES", "ORTIZ", "CASTILLO", "ROMERO", "ALVAREZ",
    "MENDOZA", "VASQUEZ", "CAMPOS", "GUERRERO", "AGUILAR", "MEJIA", "MIRANDA",
    "FUENTES", "SERRANO", "NAVARRO", "PORTILLO", "ESCOBAR", "BONILLA",
    "QUINTANILLA", "ALFARO", "VILLALTA", "MONTERROSA", "ZELAYA", "PINEDA",
    "ARGUETA"};

const std::vector<std::string> kMunicipalities = {
    "SANVICENTE", "TECOLUCA", "APASTEPEQUE", "GUADALUPE", "VERAPAZ",
    "TEPETITAN", "SANESTEBAN", "SANILDEFONSO"};

struct Individual {
  std::string given, family, muni;
  int year, month, day;
};

void check_prob(double p, const std::string& what) {
  if (!(p >= 0.0 && p <= 1.0)) throw ConstraintError(what + " must lie in [0,1]");
}

int wrapped_shift(int value, int offset, int base, int modulus) {
  // cyclic on base..base+modulus-1 so shifted dates stay parseable
  int v = value - base + offset;
  v = ((v % modulus) + modulus) % modulus;
  return v + base;
}

std::string typo_name(const std::string& s, Rng& rng) {
  std::string out = s;
  const bool transpose = out.size() >= 2 && rng.uniform() < 0.5;
  if (transpose) {
    const auto p = static_cast<std::size_t>(rng.uniform() * static_cast<double>(out.size() - 1));
    std::swap(out[p], out[p + 1]);
  } else {
    const auto p = static_cast<std::size_t>(rng.uniform() * static_cast<double>(out.size()));
    char c;
    do {
      c = static_cast<char>('A' + static_cast<int>(rng.uniform() * 26.0));
    } while (c == out[p]);
    out[p] = c;
  }
  return out;
}

int draw_offset(int shift_max, Rng& rng) {
  const int span = 2 * shift_max;  // -shift_max..-1, 1..shift_max
  int off = 1 + static_cast<int>(rng.uniform() * static_cast<double>(span));
  if (off > shift_max) off = shift_max - off;  // fold the upper half negative
  return off;
}

std::uint32_t draw_pattern(const SimCapture& cap, int k, Rng& rng) {
  switch (cap.kind) {
    case SimCapture::Kind::Independence: {
      std::uint32_t mask = 0;
      for (int l = 0; l < k; ++l)
        if (rng.uniform() < cap.theta[static_cast<std::size_t>(l)]) mask |= 1u << l;
      return mask;
    }
    case SimCapture::Kind::Cells: {
      double u = rng.uniform();
      for (std::size_t h = 0; h + 1 < cap.cells.size(); ++h) {
        u -= cap.cells[h];
        if (u < 0.0) return static_cast<std::uint32_t>(h);
      }
      return static_cast<std::uint32_t>(cap.cells.size() - 1);
    }
    case SimCapture::Kind::LatentClass: {
      double u = rng.uniform();
      std::size_t c = cap.class_weights.size() - 1;
      for (std::size_t s = 0; s + 1 < cap.class_weights.size(); ++s) {
        u -= cap.class_weights[s];
        if (u < 0.0) {
          c = s;
          break;
        }
      }
      std::uint32_t mask = 0;
      for (int l = 0; l < k; ++l)
        if (rng.uniform() < cap.class_theta[c][static_cast<std::size_t>(l)]) mask |= 1u << l;
      return mask;
    }
  }
  return 0;
}

}  // namespace

Schema sim_schema() {
  return {{"given", FieldKind::NameString, false},  {"family", FieldKind::NameString, false},
          {"year", FieldKind::DateYear, false},     {"month", FieldKind::DateMonth, false},
          {"day", FieldKind::DateDay, false},       {"municipality", FieldKind::Categorical, false}};
}

void SimSpec::validate() const {
  if (n_true < 1) throw ConstraintError("simulation needs n_true >= 1");
  if (k < 2 || k > kMaxLists) throw ConstraintError("simulation needs 2..16 lists");
  switch (capture.kind) {
    case SimCapture::Kind::Independence:
      if (capture.theta.size() != static_cast<std::size_t>(k))
        throw ConstraintError("independence capture needs one theta per list");
      for (double t : capture.theta) check_prob(t, "capture theta");
      break;
    case SimCapture::Kind::Cells: {
      if (capture.cells.size() != (std::size_t{1} << k))
        throw ConstraintError("cell capture needs 2^k cell probabilities");
      double sum = 0.0;
      for (double c : capture.cells) {
        check_prob(c, "cell probability");
        sum += c;
      }
      if (std::abs(sum - 1.0) > 1e-9)
        throw ConstraintError("cell probabilities must sum to 1");
      break;
    }
    case SimCapture::Kind::LatentClass: {
      if (capture.class_weights.empty() ||
          capture.class_weights.size() != capture.class_theta.size())
        throw ConstraintError("latent-class capture needs matching weights and theta rows");
      double sum = 0.0;
      for (double w : capture.class_weights) {
        check_prob(w, "class weight");
        sum += w;
      }
      if (std::abs(sum - 1.0) > 1e-9) throw ConstraintError("class weights must sum to 1");
      for (const auto& row : capture.class_theta) {
        if (row.size() != static_cast<std::size_t>(k))
          throw ConstraintError("each class needs one theta per list");
        for (double t : row) check_prob(t, "class theta");
      }
      break;
    }
  }
  if (!distortion.empty() && distortion.size() != sim_schema().size())
    throw ConstraintError("distortion needs one entry per schema field");
  for (const auto& d : distortion) {
    check_prob(d.typo, "typo rate");
    check_prob(d.missing, "missingness rate");
    check_prob(d.shift, "shift rate");
    if (d.shift_max < 1) throw ConstraintError("shift_max must be >= 1");
  }
  if (!duplicate_rate.empty() && duplicate_rate.size() != static_cast<std::size_t>(k))
    throw ConstraintError("duplicate rates need one entry per list");
  for (double r : duplicate_rate) check_prob(r, "duplicate rate");
  if (given_names.empty() || family_names.empty() || municipalities.empty())
    throw ConstraintError("dictionaries must be nonempty");
  if (year_min > year_max) throw ConstraintError("year_min must be <= year_max");
}

ContingencyTable SimOutput::true_observed() const {
  ContingencyTable t;
  t.k = static_cast<int>(store.list_count());
  for (std::size_t h = 1; h < true_cells.size(); ++h)
    if (true_cells[h] > 0) t.counts.emplace_back(static_cast<std::uint32_t>(h), true_cells[h]);
  return t;
}

SimOutput generate(const SimSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);

  std::vector<Individual> people;
  people.reserve(static_cast<std::size_t>(spec.n_true));
  std::vector<std::uint32_t> patterns;
  SimOutput out;
  out.true_cells.assign(std::size_t{1} << spec.k, 0);

  auto pick = [&](const std::vector<std::string>& dict) {
    return dict[static_cast<std::size_t>(rng.uniform() * static_cast<double>(dict.size()))];
  };
  for (long id = 0; id < spec.n_true; ++id) {
    Individual p;
    p.given = pick(spec.given_names);
    p.family = pick(spec.family_names);
    p.year = spec.year_min +
             static_cast<int>(rng.uniform() * static_cast<double>(spec.year_max - spec.year_min + 1));
    p.month = 1 + static_cast<int>(rng.uniform() * 12.0);
    p.day = 1 + static_cast<int>(rng.uniform() * 28.0);
    p.muni = pick(spec.municipalities);
    people.push_back(std::move(p));
    const std::uint32_t mask = draw_pattern(spec.capture, spec.k, rng);
    patterns.push_back(mask);
    ++out.true_cells[mask];
  }

  const Schema schema = sim_schema();
  out.store.schema = schema;
  const std::vector<FieldDistortion> dist =
      spec.distortion.empty() ? std::vector<FieldDistortion>(schema.size())
                              : spec.distortion;

  auto emit = [&](int list, long id) {
    const Individual& p = people[static_cast<std::size_t>(id)];
    RecordEntry rec;
    rec.record_index = static_cast<std::uint32_t>(out.store.records.size());
    rec.list_index = list + 1;
    rec.label = "r" + std::to_string(rec.record_index);
    rec.values.resize(schema.size());
    for (std::size_t f = 0; f < schema.size(); ++f) {
      const FieldDistortion& d = dist[f];
      if (d.missing > 0.0 && rng.uniform() < d.missing) continue;
      FieldValue v;
      switch (f) {
        case 0: v.text = p.given; break;
        case 1: v.text = p.family; break;
        case 2: v.number = p.year; break;
        case 3: v.number = p.month; break;
        case 4: v.number = p.day; break;
        case 5: v.text = p.muni; break;
      }
      if (schema[f].kind == FieldKind::NameString) {
        if (d.typo > 0.0 && rng.uniform() < d.typo) v.text = typo_name(v.text, rng);
      } else if (schema[f].kind == FieldKind::Categorical) {
        if (d.typo > 0.0 && spec.municipalities.size() > 1 && rng.uniform() < d.typo) {
          // flip to one of the other dictionary slots
          auto idx = static_cast<std::size_t>(rng.uniform() *
                                              static_cast<double>(spec.municipalities.size() - 1));
          if (spec.municipalities[idx] == v.text) idx = spec.municipalities.size() - 1;
          v.text = spec.municipalities[idx];
        }
      } else if (d.shift > 0.0 && rng.uniform() < d.shift) {
        const int off = draw_offset(d.shift_max, rng);
        if (schema[f].kind == FieldKind::DateYear) v.number += off;
        else if (schema[f].kind == FieldKind::DateMonth) v.number = wrapped_shift(v.number, off, 1, 12);
        else v.number = wrapped_shift(v.number, off, 1, 28);
      }
      rec.values[f] = std::move(v);
    }
    out.store.records.push_back(std::move(rec));
    out.truth.push_back(static_cast<std::uint32_t>(id));
  };

  for (int list = 0; list < spec.k; ++list) {
    SourceList sl;
    sl.list_index = list + 1;
    sl.label = "list" + std::to_string(list + 1);
    const std::size_t before = out.store.records.size();
    for (long id = 0; id < spec.n_true; ++id) {
      if (!(patterns[static_cast<std::size_t>(id)] & (1u << list))) continue;
      emit(list, id);
      if (!spec.duplicate_rate.empty() &&
          rng.uniform() < spec.duplicate_rate[static_cast<std::size_t>(list)])
        emit(list, id);
    }
    sl.size = out.store.records.size() - before;
    out.store.lists.push_back(std::move(sl));
  }
  return out;
}

SimSpec read_sim_spec(const std::string& path) {
  const KvFile file = read_kvfile(path);
  SimSpec spec;

  const KvSection* sim = file.find("simulate");
  if (!sim) throw ParseError(path + ": missing [simulate] section");
  spec.n_true = sim->require_long("n_true");
  spec.k = static_cast<int>(sim->require_long("lists"));
  spec.seed = static_cast<std::uint64_t>(sim->get_long("seed", 1));
  spec.year_min = static_cast<int>(sim->get_long("year_min", 1980));
  spec.year_max = static_cast<int>(sim->get_long("year_max", 1992));
  if (auto dup = sim->get("duplicates")) {
    for (const std::string& s : split_list(*dup)) spec.duplicate_rate.push_back(std::stod(s));
  }

  const KvSection* cap = file.find("capture");
  if (!cap) throw ParseError(path + ": missing [capture] section");
  const std::string model = cap->require("model");
  auto doubles = [](const std::string& value) {
    std::vector<double> out;
    for (const std::string& s : split_list(value)) out.push_back(std::stod(s));
    return out;
  };
  if (model == "independence") {
    spec.capture.kind = SimCapture::Kind::Independence;
    spec.capture.theta = doubles(cap->require("theta"));
  } else if (model == "cells") {
    spec.capture.kind = SimCapture::Kind::Cells;
    spec.capture.cells = doubles(cap->require("cells"));
  } else if (model == "latent-class") {
    spec.capture.kind = SimCapture::Kind::LatentClass;
    for (const KvSection* cls : file.find_all("class")) {
      spec.capture.class_weights.push_back(cls->require_double("weight"));
      spec.capture.class_theta.push_back(doubles(cls->require("theta")));
    }
    if (spec.capture.class_weights.empty())
      throw ParseError(path + ": latent-class capture needs [class] sections");
  } else {
    throw ParseError(path + ": unknown capture model '" + model + "'");
  }

  const Schema schema = sim_schema();
  const auto distort_sections = file.find_all("distort");
  if (!distort_sections.empty()) {
    spec.distortion.assign(schema.size(), FieldDistortion{});
    for (const KvSection* sec : distort_sections) {
      const std::string fname = sec->require("field");
      std::size_t f = 0;
      while (f < schema.size() && schema[f].name != fname) ++f;
      if (f == schema.size())
        throw ParseError(path + ": [distort] names unknown field '" + fname + "'");
      spec.distortion[f].typo = sec->get_double("typo", 0.0);
      spec.distortion[f].missing = sec->get_double("missing", 0.0);
      spec.distortion[f].shift = sec->get_double("shift", 0.0);
      spec.distortion[f].shift_max = static_cast<int>(sec->get_long("shift_max", 2));
    }
  }

  if (const KvSection* dict = file.find("dictionaries")) {
    if (auto v = dict->get("given")) spec.given_names = split_list(*v);
    if (auto v = dict->get("family")) spec.family_names = split_list(*v);
    if (auto v = dict->get("municipality")) spec.municipalities = split_list(*v);
  }
  if (spec.given_names.empty()) spec.given_names = kGivenNames;
  if (spec.family_names.empty()) spec.family_names = kFamilyNames;
  if (spec.municipalities.empty()) spec.municipalities = kMunicipalities;

  spec.validate();
  return spec;
}

std::vector<std::string> write_sim_output(const SimOutput& out, const std::string& dir) {
  std::filesystem::create_directories(dir);
  const Schema& schema = out.store.schema;
  std::vector<std::string> paths;

  for (const SourceList& list : out.store.lists) {
    const std::string path = dir + "/" + list.label + ".csv";
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot write " + path);
    std::vector<std::string> header{"record_label"};
    for (const auto& fs : schema) header.push_back(fs.name);
    write_csv_row(f, header);
    for (const RecordEntry& rec : out.store.records) {
      if (rec.list_index != list.list_index) continue;
      std::vector<std::string> row{rec.label};
      for (std::size_t c = 0; c < schema.size(); ++c) {
        const auto& v = rec.values[c];
        if (!v) row.emplace_back();
        else if (schema[c].kind == FieldKind::NameString ||
                 schema[c].kind == FieldKind::Categorical)
          row.push_back(v->text);
        else
          row.push_back(std::to_string(v->number));
      }
      write_csv_row(f, row);
    }
    if (!f) throw IoError("write failed: " + path);
    paths.push_back(path);
  }

  {
    std::ofstream f(dir + "/truth.csv", std::ios::binary);
    if (!f) throw IoError("cannot write " + dir + "/truth.csv");
    write_csv_row(f, {"record_index", "list", "record_label", "individual"});
    for (std::size_t r = 0; r < out.store.records.size(); ++r) {
      const RecordEntry& rec = out.store.records[r];
      write_csv_row(f, {std::to_string(rec.record_index), std::to_string(rec.list_index),
                        rec.label, std::to_string(out.truth[r])});
    }
  }
  {
    const int k = static_cast<int>(out.store.list_count());
    std::ofstream f(dir + "/true_table.csv", std::ios::binary);
    if (!f) throw IoError("cannot write " + dir + "/true_table.csv");
    write_csv_row(f, {"pattern", "count"});
    for (std::size_t h = 0; h < out.true_cells.size(); ++h)
      write_csv_row(f, {pattern_string(static_cast<std::uint32_t>(h), k),
                        std::to_string(out.true_cells[h])});
  }
  return paths;
}

}  // namespace linkmse
