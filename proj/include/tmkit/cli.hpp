#pragma once

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tmkit/bpmn.hpp"
#include "tmkit/diagnostics.hpp"
#include "tmkit/dsl.hpp"
#include "tmkit/dynamics.hpp"
#include "tmkit/render.hpp"
#include "tmkit/scenario.hpp"
#include "tmkit/sim.hpp"
#include "tmkit/validate.hpp"

namespace tmkit::cli {

// Exit codes: 0 ok, 1 parse/validation errors, 2 usage, 3 runtime (IO, tick
// budget). `-o -` writes to standard output. TM_COLOR=0 disables ANSI color
// in diagnostics.

constexpr int kExitOk = 0;
constexpr int kExitDiagnostics = 1;
constexpr int kExitUsage = 2;
constexpr int kExitRuntime = 3;

inline bool color_enabled() {
  const char* v = std::getenv("TM_COLOR");
  return v == nullptr || std::string(v) != "0";
}

inline void print_diagnostics(const Diagnostics& diags, const std::string& file, std::ostream& os) {
  bool color = color_enabled();
  for (const Diagnostic& d : diags.items) {
    bool is_error = d.severity == Severity::Error;
    std::string tag = is_error ? "error" : "warning";
    if (color) tag = (is_error ? "\033[31m" : "\033[33m") + tag + "\033[0m";
    os << file;
    if (d.line > 0) os << ":" << d.line << ":" << d.col;
    os << ": " << tag << "[" << d.code << "]: " << d.message << "\n";
  }
}

inline std::optional<std::string> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

inline bool write_output(const std::string& path, const std::string& content, std::ostream& stdout_stream) {
  if (path == "-" || path.empty()) {
    stdout_stream << content;
    return true;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) return false;
  out << content;
  return out.good();
}

struct LoadedModel {
  ParseResult parsed;
  int exit_code = kExitOk;
};

inline LoadedModel load_model(const std::string& path, std::ostream& out, std::ostream& err) {
  LoadedModel loaded;
  auto text = read_file(path);
  if (!text) {
    err << path << ": cannot read file\n";
    loaded.exit_code = kExitRuntime;
    return loaded;
  }
  loaded.parsed = parse(*text);
  if (!loaded.parsed.ok()) {
    print_diagnostics(loaded.parsed.diagnostics, path, err);
    loaded.exit_code = kExitDiagnostics;
  }
  (void)out;
  return loaded;
}

inline int run(std::vector<std::string> args, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  CLI::App app{"thinging-machine model toolkit"};
  app.require_subcommand(1);

  std::string file, output = "-", view = "static", scenario_path, trace_path;
  std::optional<std::uint64_t> seed_override;
  std::optional<Tick> until;
  bool show_stats = false;

  auto* cmd_parse = app.add_subcommand("parse", "parse a model and echo its canonical form");
  cmd_parse->add_option("file", file)->required();
  cmd_parse->add_option("-o,--output", output);

  auto* cmd_validate = app.add_subcommand("validate", "report well-formedness diagnostics");
  cmd_validate->add_option("file", file)->required();

  auto* cmd_compile = app.add_subcommand("compile", "summarize the compiled dynamic model");
  cmd_compile->add_option("file", file)->required();

  auto* cmd_simulate = app.add_subcommand("simulate", "run a scenario over the model");
  cmd_simulate->add_option("file", file)->required();
  cmd_simulate->add_option("--scenario", scenario_path)->required();
  cmd_simulate->add_option("--seed", seed_override);
  cmd_simulate->add_option("--until", until);
  cmd_simulate->add_option("--trace", trace_path);
  cmd_simulate->add_flag("--stats", show_stats);

  auto* cmd_import = app.add_subcommand("import-bpmn", "map a BPMN file to a model");
  cmd_import->add_option("file", file)->required();
  cmd_import->add_option("-o,--output", output);

  auto* cmd_render = app.add_subcommand("render", "emit a DOT view");
  cmd_render->add_option("file", file)->required();
  cmd_render->add_option("--view", view)->check(CLI::IsMember({"static", "dynamic", "chronology"}));
  cmd_render->add_option("-o,--output", output);

  auto* cmd_simplify = app.add_subcommand("simplify", "collapse transfer chains");
  cmd_simplify->add_option("file", file)->required();
  cmd_simplify->add_option("-o,--output", output);

  std::vector<const char*> argv;
  argv.push_back("tm");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (cmd_parse->parsed()) {
      LoadedModel loaded = load_model(file, out, err);
      if (loaded.exit_code) return loaded.exit_code;
      std::string text = print(loaded.parsed.model, loaded.parsed.decls);
      return write_output(output, text, out) ? kExitOk : kExitRuntime;
    }

    if (cmd_validate->parsed()) {
      LoadedModel loaded = load_model(file, out, err);
      if (loaded.exit_code) return loaded.exit_code;
      Diagnostics diags = validate(loaded.parsed.model, loaded.parsed.decls);
      print_diagnostics(diags, file, diags.ok() ? out : err);
      out << file << ": " << diags.error_count() << " error(s), " << diags.warning_count()
          << " warning(s)\n";
      return diags.ok() ? kExitOk : kExitDiagnostics;
    }

    if (cmd_compile->parsed()) {
      LoadedModel loaded = load_model(file, out, err);
      if (loaded.exit_code) return loaded.exit_code;
      CompileResult compiled = compile_dynamic(loaded.parsed.model, loaded.parsed.decls);
      if (!compiled.ok()) {
        print_diagnostics(compiled.diagnostics, file, err);
        return kExitDiagnostics;
      }
      const DynamicModel& dyn = *compiled.model;
      out << "events: " << dyn.events.size() << "\n";
      for (const Event& e : dyn.events) {
        out << "  " << e.name << " region=" << e.region.nodes.size() << " stage(s)"
            << " duration=" << e.duration;
        if (e.extended) out << " extended";
        if (e.instantaneous) out << " instant";
        if (e.measure) out << " measure=\"" << *e.measure << "\"";
        out << "\n";
      }
      out << "negatives: " << dyn.negatives.size() << "\n";
      for (const NegativeEvent& n : dyn.negatives) {
        out << "  " << n.name << " of " << n.paired_event << "\n";
      }
      out << "chronology: " << dyn.chronology.edges.size() << " edge(s), "
          << dyn.chronology.joins.size() << " join(s)\n";
      return kExitOk;
    }

    if (cmd_simulate->parsed()) {
      LoadedModel loaded = load_model(file, out, err);
      if (loaded.exit_code) return loaded.exit_code;
      CompileResult compiled = compile_dynamic(loaded.parsed.model, loaded.parsed.decls);
      if (!compiled.ok()) {
        print_diagnostics(compiled.diagnostics, file, err);
        return kExitDiagnostics;
      }
      auto scenario_text = read_file(scenario_path);
      if (!scenario_text) {
        err << scenario_path << ": cannot read file\n";
        return kExitRuntime;
      }
      Scenario scenario = parse_scenario(*scenario_text);
      if (seed_override) scenario.seed = *seed_override;
      SimState state(*compiled.model, scenario);
      Trace trace = state.run(until);
      std::string jsonl = to_jsonl(trace);
      if (!trace_path.empty()) {
        if (!write_output(trace_path, jsonl, out)) {
          err << trace_path << ": cannot write file\n";
          return kExitRuntime;
        }
      } else {
        out << jsonl;
      }
      std::size_t positives = 0, negatives = 0;
      for (const Occurrence& occ : trace.items) (occ.negative ? negatives : positives) += 1;
      out << "occurrences: " << positives << " positive, " << negatives << " negative\n";
      if (show_stats) {
        RegionStats s = state.stats();
        out << "region statistics (event, activations, negatives, active):\n";
        for (const auto& [name, stat] : s.by_event) {
          out << "  " << name << " " << stat.activations << " " << stat.negatives << " "
              << stat.active << "\n";
        }
      }
      return kExitOk;
    }

    if (cmd_import->parsed()) {
      auto text = read_file(file);
      if (!text) {
        err << file << ": cannot read file\n";
        return kExitRuntime;
      }
      BpmnParseResult parsed = parse_bpmn(*text);
      print_diagnostics(parsed.diagnostics, file, parsed.ok() ? out : err);
      if (!parsed.ok()) return kExitDiagnostics;
      BpmnImport imported = map_bpmn(*parsed.graph);
      if (!imported.ok()) {
        print_diagnostics(imported.diagnostics, file, err);
        return kExitDiagnostics;
      }
      std::string rendered = print(imported.model, imported.decls);
      return write_output(output, rendered, out) ? kExitOk : kExitRuntime;
    }

    if (cmd_render->parsed()) {
      LoadedModel loaded = load_model(file, out, err);
      if (loaded.exit_code) return loaded.exit_code;
      std::string text;
      if (view == "static") {
        text = to_dot(loaded.parsed.model);
      } else {
        CompileResult compiled = compile_dynamic(loaded.parsed.model, loaded.parsed.decls);
        if (!compiled.ok()) {
          print_diagnostics(compiled.diagnostics, file, err);
          return kExitDiagnostics;
        }
        text = view == "dynamic" ? to_dot_dynamic(*compiled.model)
                                 : to_dot_chronology(*compiled.model);
      }
      return write_output(output, text, out) ? kExitOk : kExitRuntime;
    }

    if (cmd_simplify->parsed()) {
      LoadedModel loaded = load_model(file, out, err);
      if (loaded.exit_code) return loaded.exit_code;
      SimplifiedModel simplified = simplify(loaded.parsed.model);
      StaticModel view_model = simplified.model;
      for (const SimplifiedArc& a : simplified.arcs) {
        view_model.add_trigger(a.from, a.to);  // textual view renders collapsed chains as triggers
      }
      return write_output(output, print(view_model), out) ? kExitOk : kExitRuntime;
    }
  } catch (const Error& e) {
    switch (e.code()) {
      case Errc::UnresolvedGuard: {
        Diagnostics diags;
        diags.error("E_GUARD_UNRESOLVED", e.what());
        print_diagnostics(diags, file, err);
        return kExitDiagnostics;
      }
      case Errc::ScenarioError:
        err << scenario_path << ": " << e.what() << "\n";
        return kExitUsage;
      default:
        err << e.what() << "\n";
        return kExitRuntime;
    }
  }
  return kExitUsage;
}

}  // namespace tmkit::cli
