"""Excel export of accuracy suite results with formatting."""

import logging
from typing import Dict, List, Sequence, Tuple

from openpyxl import Workbook
from openpyxl.styles import Alignment, Border, Font, PatternFill, Side
from openpyxl.utils import get_column_letter

logger = logging.getLogger('wnd_accuracy')

ACCURACY_COLUMNS: List[Tuple[str, str]] = [
    ('|R|', 'receivers'),
    ('|T|', 'transmitters'),
    ('seed', 'seed'),
    ('scale', 'scale'),
    ('α min', 'alpha_min'),
    ('α max', 'alpha_max'),
    ('obj.', 'objective'),
    ('linear viol.', 'linear_violation'),
    ('SIR viol.', 'sir_violation'),
    ('served', 'served'),
    ('unserved', 'unserved'),
    ('stat.', 'exact_status'),
    ('exact LP time', 'exact_time'),
    ('nodes', 'nodes'),
    ('MIP status', 'mip_status'),
]

REFINEMENT_COLUMNS: List[Tuple[str, str]] = [
    ('|R|', 'receivers'),
    ('|T|', 'transmitters'),
    ('seed', 'seed'),
    ('scale', 'scale'),
    ('max. viol.', 'refine_violation'),
    ('rounds', 'refine_rounds'),
    ('status', 'refine_status'),
    ('refinement time', 'refine_time'),
    ('exact LP time', 'exact_time'),
    ('rel. time diff. %', 'time_difference_pct'),
]

SCIENTIFIC_KEYS = {'alpha_min', 'alpha_max', 'linear_violation', 'sir_violation', 'refine_violation'}


class ExcelExporter:
    """Export suite rows to Excel with formatting."""

    def __init__(self, output_path: str):
        """
        Initialize Excel exporter.

        Args:
            output_path: Path where Excel file will be saved
        """
        self.output_path = output_path
        self.workbook = Workbook()

        # Remove default sheet
        if 'Sheet' in self.workbook.sheetnames:
            del self.workbook['Sheet']

    def _write_table(self, title: str, columns: Sequence[Tuple[str, str]], rows: List[Dict]):
        ws = self.workbook.create_sheet(title)

        for col_idx, (header, _) in enumerate(columns, 1):
            cell = ws.cell(1, col_idx, header)
            cell.font = Font(bold=True, color='FFFFFF')
            cell.fill = PatternFill(start_color='4472C4', fill_type='solid')
            cell.alignment = Alignment(horizontal='center', vertical='center')

        for row_idx, row in enumerate(rows, 2):
            for col_idx, (_, key) in enumerate(columns, 1):
                value = row.get(key)
                cell = ws.cell(row_idx, col_idx, '-' if value is None else value)
                if key in SCIENTIFIC_KEYS and isinstance(value, float):
                    cell.number_format = '0.0E+00'

        # Freeze header row
        ws.freeze_panes = 'A2'
        ws.auto_filter.ref = f'A1:{get_column_letter(len(columns))}1'
        self._auto_size_columns(ws)
        return ws

    def create_accuracy_sheet(self, title: str, rows: List[Dict]):
        """
        Create a check-and-verification worksheet (one row per solved instance).

        Args:
            title: Sheet title, e.g. "Unscaled" or "Scaled 1e12"
            rows: Suite rows
        """
        return self._write_table(title[:31], ACCURACY_COLUMNS, rows)

    def create_refinement_sheet(self, rows: List[Dict]):
        """Create the refinement worksheet from rows that reached the refinement step."""
        refined = [row for row in rows if row.get('refine_status') is not None]
        if not refined:
            logger.warning("No refinement results to export")
        return self._write_table('Refinement', REFINEMENT_COLUMNS, refined)

    def create_summary_sheet(self, rows: List[Dict]):
        """
        Create summary worksheet with per-scale totals.

        Args:
            rows: Suite rows
        """
        ws = self.workbook.create_sheet('Summary', 0)

        ws['A1'] = 'Accuracy Suite Summary'
        ws['A1'].font = Font(size=16, bold=True)
        ws.merge_cells('A1:F1')

        headers = ['scale', 'instances', 'claimed', 'served', 'exactly feasible', 'refined']
        for col_idx, header in enumerate(headers, 1):
            cell = ws.cell(3, col_idx, header)
            cell.font = Font(bold=True)
            cell.fill = PatternFill(start_color='D3D3D3', fill_type='solid')

        by_scale: Dict[str, List[Dict]] = {}
        for row in rows:
            by_scale.setdefault(row.get('scale', '-'), []).append(row)

        row_idx = 4
        for scale, group in by_scale.items():
            ws.cell(row_idx, 1, scale)
            ws.cell(row_idx, 2, len(group))
            ws.cell(row_idx, 3, sum((r.get('served') or 0) + (r.get('unserved') or 0) for r in group))
            ws.cell(row_idx, 4, sum(r.get('served') or 0 for r in group))
            ws.cell(row_idx, 5, sum(1 for r in group if r.get('exact_status') == 'feasible'))
            ws.cell(row_idx, 6, sum(1 for r in group if r.get('refine_status') == 'success'))
            row_idx += 1

        self._auto_size_columns(ws)
        return ws

    def _auto_size_columns(self, worksheet):
        """
        Auto-size all columns based on content.

        Args:
            worksheet: Worksheet to adjust
        """
        for column in worksheet.columns:
            max_length = 0
            column_letter = get_column_letter(column[0].column)

            for cell in column:
                if cell.value is not None:
                    max_length = max(max_length, len(str(cell.value)))

            worksheet.column_dimensions[column_letter].width = min(max_length + 2, 50)

    def apply_formatting(self):
        """Apply consistent formatting to all sheets."""
        side = Side(style='thin', color='D3D3D3')
        for sheet in self.workbook:
            for row in sheet.iter_rows():
                for cell in row:
                    if cell.value is not None:
                        cell.border = Border(left=side, right=side, top=side, bottom=side)

    def save(self):
        """Save workbook to file."""
        try:
            self.workbook.save(self.output_path)
            logger.info(f"Excel file saved: {self.output_path}")
        except Exception as e:
            logger.error(f"Failed to save Excel file: {e}")
            raise
