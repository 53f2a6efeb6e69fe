from .render_figures import (ColumnError, FigureSpec, KINDS, main,
                             read_table, render)

__all__ = ["ColumnError", "FigureSpec", "KINDS", "main", "read_table",
           "render"]
