#pragma once

#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include <json.hpp>

#include "movelet/classify.hpp"
#include "movelet/core.hpp"

namespace movelet {

inline constexpr int kDictionaryFormatVersion = 1;

inline nlohmann::json dictionary_to_json(const Dictionary& dict) {
  nlohmann::json entries = nlohmann::json::array();
  for (const DictionaryEntry& e : dict.entries) {
    nlohmann::json movelets = nlohmann::json::array();
    for (const Movelet& m : e.movelets)
      movelets.push_back({{"start_index", m.start_index}, {"values", m.values}});
    entries.push_back({{"label", e.label}, {"movelets", std::move(movelets)}});
  }
  return {
      {"format_version", kDictionaryFormatVersion},
      {"sensor", to_token(dict.sensor)},
      {"rep", to_token(dict.rep())},
      {"config",
       {{"window_seconds", dict.config.window_seconds},
        {"train_seconds", dict.config.train_seconds},
        {"vote_horizon_seconds", dict.config.vote_horizon_seconds},
        {"hz", dict.config.hz}}},
      {"entries", std::move(entries)},
  };
}

inline Dictionary dictionary_from_json(const nlohmann::json& doc) {
  try {
    const int version = doc.at("format_version").get<int>();
    if (version != kDictionaryFormatVersion)
      throw ParseError("unsupported dictionary format_version " +
                       std::to_string(version));

    Dictionary dict;
    dict.sensor = sensor_from_token(doc.at("sensor").get<std::string>());
    dict.config.rep = representation_from_token(doc.at("rep").get<std::string>());
    const auto& cfg = doc.at("config");
    dict.config.window_seconds = cfg.at("window_seconds").get<double>();
    dict.config.train_seconds = cfg.at("train_seconds").get<double>();
    dict.config.vote_horizon_seconds = cfg.at("vote_horizon_seconds").get<double>();
    dict.config.hz = cfg.at("hz").get<double>();
    dict.config.validate();

    const std::size_t f = dict.config.window_samples();
    const std::size_t channels = channel_count(dict.config.rep);
    for (const auto& entry : doc.at("entries")) {
      DictionaryEntry e;
      e.label = entry.at("label").get<std::string>();
      for (const auto& mv : entry.at("movelets")) {
        Movelet m;
        m.start_index = mv.at("start_index").get<std::size_t>();
        m.rep = dict.config.rep;
        m.values = mv.at("values").get<std::vector<std::vector<double>>>();
        if (m.values.size() != channels)
          throw ParseError("movelet in '" + e.label + "' has " +
                           std::to_string(m.values.size()) + " channels, rep needs " +
                           std::to_string(channels));
        for (const auto& ch : m.values)
          if (ch.size() != f)
            throw ParseError("movelet in '" + e.label + "' has " +
                             std::to_string(ch.size()) + " samples, window is " +
                             std::to_string(f));
        e.movelets.push_back(std::move(m));
      }
      if (e.movelets.empty())
        throw ParseError("entry '" + e.label + "' has no movelets");
      dict.entries.push_back(std::move(e));
    }
    if (dict.entries.empty()) throw ParseError("dictionary has no entries");
    return dict;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad dictionary document: ") + e.what());
  }
}

inline void save_dictionary(std::ostream& out, const Dictionary& dict) {
  out << dictionary_to_json(dict).dump(1, '\t') << '\n';
}

inline void save_dictionary_file(const std::filesystem::path& path,
                                 const Dictionary& dict) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write dictionary file: " + path.string());
  save_dictionary(out, dict);
  if (!out) throw IoError("failed writing dictionary file: " + path.string());
}

inline Dictionary load_dictionary(std::istream& in) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad dictionary JSON: ") + e.what());
  }
  return dictionary_from_json(doc);
}

inline Dictionary load_dictionary_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open dictionary file: " + path.string());
  return load_dictionary(in);
}

}  // namespace movelet
