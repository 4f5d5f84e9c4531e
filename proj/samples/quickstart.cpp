// Approximate |x - 0.3| on [0, 1], lower it to a ReLU net and check the result.
#include <iostream>

#include "narrow/narrow.hpp"

int main() {
  using namespace narrow;
  const auto fn = expr::parse("abs(x1 - 0.3)", 1);
  const Function f = expr::to_function(fn);
  const Box box(Vector::Constant(1, 0.0), Vector::Constant(1, 1.0));
  const Ball domain = box.enclosing_ball();

  const auto built = build(f, Lipschitz{1.0}, domain, 0.05);
  const ReluNet net = compile(built.string, domain);
  const auto grid = net_grid_error(net, f, box, default_grid_size(1));

  std::cout << "string length " << built.string.length() << ", net depth " << net.depth() << ", hidden width "
            << net.hidden_widths().front() << ", grid error " << grid.max_error << '\n';
  return grid.max_error <= 0.05 + 1e-4 ? 0 : 1;
}
