/*
 Copyright 2026 The parshoot Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#include "cli.hpp"

#include <algorithm>
#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include "CLI11.hpp"

#include "parshoot/report.hpp"

namespace parshoot::cli
{

  namespace
  {

    struct UsageError : std::runtime_error
    {
      using std::runtime_error::runtime_error;
    };

    struct Common
    {
      std::string problem;
      int grid = 1000;
      std::string scheme = "implicit-euler";
      double tol = 1e-10;
      int max_iter = 30;
      std::uint64_t seed = 0;
      std::string out;
    };

    void add_common(CLI::App *sub, Common &c, int default_grid)
    {
      c.grid = default_grid;
      sub->add_option("--problem", c.problem, "Registered problem name")->required();
      sub->add_option("--grid", c.grid, "Number of grid intervals")->check(CLI::PositiveNumber);
      sub->add_option("--scheme", c.scheme, "implicit-euler or rk4")
          ->check(CLI::IsMember({"implicit-euler", "rk4"}));
      sub->add_option("--tol", c.tol, "Stopping tolerance on |S|_inf")->check(CLI::PositiveNumber);
      sub->add_option("--max-iter", c.max_iter, "Gauss-Newton iteration cap")->check(CLI::PositiveNumber);
      sub->add_option("--out", c.out, "Output file (default stdout)");
    }

    std::vector<double> parse_list(const std::string &text, const char *flag)
    {
      std::vector<double> out;
      std::stringstream ss(text);
      std::string item;
      while (std::getline(ss, item, ','))
      {
        const char *b = item.c_str();
        char *end = nullptr;
        errno = 0;
        const double x = std::strtod(b, &end);
        if (end == b || *end != '\0' || errno == ERANGE)
          throw UsageError(std::string(flag) + ": cannot parse '" + item + "' as a number");
        out.push_back(x);
      }
      if (out.empty())
        throw UsageError(std::string(flag) + ": empty list");
      return out;
    }

    Vec start_vector(const ProblemDef &def, const std::string &text)
    {
      const int dim = def.shooting_unknowns();
      if (text.empty())
        return Vec::Zero(dim);
      const std::vector<double> xs = parse_list(text, "--nu0");
      if (static_cast<int>(xs.size()) != dim)
        throw UsageError("--nu0: problem '" + def.name() + "' has " + std::to_string(dim) + " shooting unknowns, got " +
                         std::to_string(xs.size()));
      return Eigen::Map<const Vec>(xs.data(), dim);
    }

    RunInfo run_info(const Common &c)
    {
      return {c.problem, c.grid, c.scheme, c.tol, c.seed};
    }

    GNOptions gn_options(const Common &c)
    {
      GNOptions o;
      o.tol = c.tol;
      o.max_iter = c.max_iter;
      return o;
    }

    class Sink
    {
    public:
      Sink(const std::string &path, std::ostream &fallback)
      {
        if (!path.empty())
        {
          file_.open(path);
          if (!file_)
            throw UsageError("--out: cannot open '" + path + "' for writing");
        }
        os_ = path.empty() ? &fallback : &file_;
      }
      std::ostream &stream() { return *os_; }

    private:
      std::ofstream file_;
      std::ostream *os_ = nullptr;
    };

    std::string fmt(double x)
    {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.17g", x);
      return buf;
    }

    // Outcome of a solve shared by solve, check-ssc and plot.
    struct Solved
    {
      GNReport report;
      int code = kOk;
      std::string failure;
    };

    Solved run_solve(const ProblemDef &def, const Vec &nu0, const Common &c)
    {
      Solved s;
      try
      {
        s.report = gauss_newton(def, nu0, c.grid, parse_scheme(c.scheme), gn_options(c));
      }
      catch (const NoConvergence &e)
      {
        s.report = e.report();
        s.code = kNoConvergence;
        s.failure = e.what();
      }
      catch (const SingularNormalMatrix &e)
      {
        s.report = e.report();
        s.code = kSingular;
        s.failure = e.what();
      }
      catch (const UsageError &)
      {
        throw;
      }
      catch (const UnknownProblem &)
      {
        throw;
      }
      catch (const Error &e)
      {
        s.code = kNoConvergence;
        s.failure = e.what();
      }
      return s;
    }

    Json solve_body(const Solved &s)
    {
      Json body = s.report.iterates.empty() ? Json{{"converged", false}} : to_json(s.report);
      if (s.code == kOk)
      {
        try
        {
          body["order"] = number(convergence_order(s.report, s.report.solution()));
        }
        catch (const InsufficientData &e)
        {
          body["order"] = nullptr;
          body["order_note"] = e.what();
        }
      }
      if (!s.failure.empty())
        body["failure"] = s.failure;
      return body;
    }

    TrajectoryGrid trajectory_at(const ProblemDef &def, const Vec &nu, const Common &c, Vec *beta)
    {
      const ShootingPoint pt = unpack(def, expand(def, nu));
      TrajectoryGrid traj;
      full_shooting_residual(def, pt, c.grid, parse_scheme(c.scheme), &traj);
      if (beta)
        *beta = pt.beta;
      return traj;
    }

    int cmd_solve(const Common &c, const std::string &nu0_text, std::ostream &out, std::ostream &err)
    {
      const ProblemDef def = builtin_problem(c.problem);
      const Solved s = run_solve(def, start_vector(def, nu0_text), c);
      Sink sink(c.out, out);
      sink.stream() << envelope("gn_report", run_info(c), solve_body(s)).dump(2) << "\n";
      if (s.code != kOk)
        err << "solve: " << s.failure << "\n";
      return s.code;
    }

    int cmd_check_ssc(const Common &c, const std::string &nu0_text, bool negate, std::ostream &out,
                      std::ostream &err)
    {
      ProblemDef def = builtin_problem(c.problem);
      if (negate)
        def = def.negated_cost(def.name() + "-negated");
      const Solved s = run_solve(def, start_vector(def, nu0_text), c);
      Sink sink(c.out, out);
      Json body{{"negate_cost", negate}, {"solve", solve_body(s)}};
      if (s.code != kOk)
      {
        body["ssc"] = nullptr;
        sink.stream() << envelope("ssc_report", run_info(c), body).dump(2) << "\n";
        err << "check-ssc: base solution did not converge: " << s.failure << "\n";
        return kNoConvergence;
      }

      Vec beta;
      const TrajectoryGrid traj = trajectory_at(def, s.report.solution(), c, &beta);
      SSCReport rep;
      try
      {
        rep = coercivity_check(def, traj, multiplier_from(traj, beta));
      }
      catch (const InternalError &)
      {
        throw;
      }
      catch (const Error &e)
      {
        body["ssc"] = nullptr;
        body["failure"] = e.what();
        sink.stream() << envelope("ssc_report", run_info(c), body).dump(2) << "\n";
        err << "check-ssc: " << e.what() << "\n";
        return kNoConvergence;
      }
      body["ssc"] = to_json(rep);
      body["qualification"] = to_json(check_qualification(def, traj));
      sink.stream() << envelope("ssc_report", run_info(c), body).dump(2) << "\n";
      return rep.coercive ? kOk : kNotCoercive;
    }

    double median(std::vector<double> xs)
    {
      std::sort(xs.begin(), xs.end());
      const size_t k = xs.size();
      return k % 2 ? xs[k / 2] : 0.5 * (xs[k / 2 - 1] + xs[k / 2]);
    }

    int cmd_sweep(const Common &c, int count, const std::string &box_text, int threads, std::ostream &out,
                  std::ostream &err)
    {
      const ProblemDef def = builtin_problem(c.problem);
      const std::vector<double> box = parse_list(box_text, "--box");
      if (box.size() != 2 || !(box[0] <= box[1]))
        throw UsageError("--box: expected lo,hi with lo <= hi");
      const int dim = def.shooting_unknowns();
      const auto starts = uniform_starts(count, dim, box[0], box[1], c.seed);
      const auto rows = multistart(def, starts, c.grid, parse_scheme(c.scheme), gn_options(c), worker_count(threads));

      Sink sink(c.out, out);
      std::ostream &os = sink.stream();
      os << "index";
      for (int j = 0; j < dim; ++j)
        os << ",nu0_" << j;
      os << ",converged,iterations,order,residual";
      for (int j = 0; j < dim; ++j)
        os << ",nu_" << j;
      os << ",failure\n";

      int ok = 0;
      std::vector<double> orders;
      for (const SweepRow &r : rows)
      {
        os << r.index;
        for (int j = 0; j < dim; ++j)
          os << "," << fmt(r.nu0(j));
        os << "," << (r.converged ? 1 : 0) << "," << r.iterations << ",";
        if (r.order)
        {
          os << fmt(*r.order);
          orders.push_back(*r.order);
        }
        os << "," << fmt(r.residual);
        for (int j = 0; j < dim; ++j)
          os << "," << (r.solution.size() == dim ? fmt(r.solution(j)) : std::string());
        os << "," << r.failure << "\n";
        ok += r.converged ? 1 : 0;
      }
      err << "success " << ok << "/" << rows.size() << " median_order "
          << (orders.empty() ? std::string("n/a") : fmt(median(orders))) << " (" << orders.size()
          << " runs with an order estimate)\n";
      return ok == static_cast<int>(rows.size()) ? kOk : kNoConvergence;
    }

    int cmd_validate(const Common &c, int samples, std::ostream &out, std::ostream &err)
    {
      const ProblemDef def = builtin_problem(c.problem);
      const ValidationReport rep = validate_problem(def, samples, c.seed);
      Sink sink(c.out, out);
      sink.stream() << envelope("validation_report", run_info(c), to_json(rep)).dump(2) << "\n";
      if (!rep.passed)
        err << "validate: worst evaluator " << rep.worst() << "\n";
      return rep.passed ? kOk : kNotCoercive;
    }

    int cmd_plot(const Common &c, const std::string &nu0_text, bool no_solve, const std::string &format,
                 std::ostream &out, std::ostream &err)
    {
      const ProblemDef def = builtin_problem(c.problem);
      Vec nu = start_vector(def, nu0_text);
      int code = kOk;
      if (!no_solve)
      {
        const Solved s = run_solve(def, nu, c);
        if (s.code != kOk)
        {
          err << "plot: " << s.failure << "\n";
          return s.code;
        }
        nu = s.report.solution();
      }
      TrajectoryGrid traj;
      try
      {
        traj = trajectory_at(def, nu, c, nullptr);
      }
      catch (const PropagationError &e)
      {
        err << "plot: " << e.what() << "\n";
        return kNoConvergence;
      }

      Sink sink(c.out, out);
      std::ostream &os = sink.stream();
      if (format == "json")
      {
        os << envelope("trajectory", run_info(c), trajectory_json(traj)).dump() << "\n";
        return code;
      }
      const int n = def.n(), l = def.l(), m = def.m();
      os << "# t";
      for (int i = 0; i < n; ++i)
        os << " x" << i + 1;
      for (int i = 0; i < n; ++i)
        os << " p" << i + 1;
      for (int i = 0; i < l; ++i)
        os << " u" << i + 1;
      for (int i = 0; i < m; ++i)
        os << " v" << i + 1;
      os << "\n";
      for (size_t k = 0; k < traj.t.size(); ++k)
      {
        os << fmt(traj.t[k]);
        for (const Vec *w : {&traj.x[k], &traj.p[k], &traj.u[k], &traj.v[k]})
          for (Eigen::Index i = 0; i < w->size(); ++i)
            os << " " << fmt((*w)(i));
        os << "\n";
      }
      return code;
    }

    std::string problem_list()
    {
      std::string s;
      for (const auto &name : available_problems())
        s += (s.empty() ? "" : ", ") + name;
      return s;
    }

  } // namespace

  int worker_count(int requested)
  {
    int n = requested > 0 ? requested : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    if (const char *cap = std::getenv("PARSHOOT_THREADS"))
    {
      char *end = nullptr;
      const long v = std::strtol(cap, &end, 10);
      if (end != cap && *end == '\0' && v >= 1)
        n = std::min<long>(n, v);
    }
    return std::max(1, n);
  }

  int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err)
  {
    CLI::App app{"Indirect shooting for partially affine optimal control problems", "parshoot"};
    app.require_subcommand(1);
    app.set_version_flag("--version", library_version());

    Common solve_c, ssc_c, sweep_c, validate_c, plot_c;
    std::string solve_nu0, ssc_nu0, plot_nu0, box = "-1,1", format = "json";
    bool negate = false, no_solve = false;
    int count = 100, threads = 0, samples = 100;

    CLI::App *solve = app.add_subcommand("solve", "Gauss-Newton solve of the shooting equations");
    add_common(solve, solve_c, 1000);
    solve->add_option("--nu0", solve_nu0, "Comma-separated starting point (default zeros)");
    solve->add_option("--seed", solve_c.seed, "Seed recorded in the report");

    CLI::App *ssc = app.add_subcommand("check-ssc", "Solve, then run the second-order coercivity check");
    add_common(ssc, ssc_c, 200);
    ssc->add_option("--nu0", ssc_nu0, "Comma-separated starting point (default zeros)");
    ssc->add_flag("--negate-cost", negate, "Replace phi_0 by -phi_0");
    ssc->add_option("--seed", ssc_c.seed, "Seed recorded in the report");

    CLI::App *sweep = app.add_subcommand("sweep", "Multistart basin study, CSV output");
    add_common(sweep, sweep_c, 1000);
    sweep_c.seed = 42;
    sweep->add_option("--multistart", count, "Number of starts")->check(CLI::PositiveNumber);
    sweep->add_option("--box", box, "lo,hi bounds of the uniform start box");
    sweep->add_option("--seed", sweep_c.seed, "Generator seed");
    sweep->add_option("--threads", threads, "Worker threads (default: hardware concurrency)")
        ->check(CLI::NonNegativeNumber);

    CLI::App *validate = app.add_subcommand("validate", "Check user derivatives against finite differences");
    add_common(validate, validate_c, 1000);
    validate->add_option("--samples", samples, "Random sample points")->check(CLI::PositiveNumber);
    validate->add_option("--seed", validate_c.seed, "Sample seed");

    CLI::App *plot = app.add_subcommand("plot", "Dump the trajectory at a solution (or at --nu0 with --no-solve)");
    add_common(plot, plot_c, 1000);
    plot->add_option("--nu0", plot_nu0, "Comma-separated starting point (default zeros)");
    plot->add_flag("--no-solve", no_solve, "Propagate from --nu0 without solving");
    plot->add_option("--format", format, "json or dat (whitespace columns for gnuplot)")
        ->check(CLI::IsMember({"json", "dat"}));
    plot->add_option("--seed", plot_c.seed, "Seed recorded in the report");

    try
    {
      std::vector<std::string> reversed(args.rbegin(), args.rend());
      app.parse(reversed);
    }
    catch (const CLI::CallForHelp &)
    {
      out << app.help();
      return kOk;
    }
    catch (const CLI::CallForAllHelp &)
    {
      out << app.help("", CLI::AppFormatMode::All);
      return kOk;
    }
    catch (const CLI::CallForVersion &)
    {
      out << library_version() << "\n";
      return kOk;
    }
    catch (const CLI::ParseError &e)
    {
      err << "error: " << e.what() << "\n\n" << app.help();
      return kUsage;
    }

    try
    {
      if (solve->parsed())
        return cmd_solve(solve_c, solve_nu0, out, err);
      if (ssc->parsed())
        return cmd_check_ssc(ssc_c, ssc_nu0, negate, out, err);
      if (sweep->parsed())
        return cmd_sweep(sweep_c, count, box, threads, out, err);
      if (validate->parsed())
        return cmd_validate(validate_c, samples, out, err);
      if (plot->parsed())
        return cmd_plot(plot_c, plot_nu0, no_solve, format, out, err);
    }
    catch (const UnknownProblem &e)
    {
      err << "error: " << e.what() << "\n";
      return kUsage;
    }
    catch (const UsageError &e)
    {
      err << "error: " << e.what() << "\n";
      return kUsage;
    }
    catch (const std::exception &e)
    {
      err << "error: " << e.what() << "\n";
      return kNoConvergence;
    }
    err << "error: no subcommand given; problems: " << problem_list() << "\n";
    return kUsage;
  }

} // namespace parshoot::cli
