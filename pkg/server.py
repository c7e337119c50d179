#!/usr/bin/env python3
"""
SILW Experiment Server
Lightweight Flask server exposing the experiment runner over HTTP
"""

from flask import Flask, request, jsonify, render_template_string
from flask_cors import CORS
import os
import time
import uuid
import logging

from errors import EXIT_CONFIG, EXIT_OK, ConfigError, SILWError, http_status_for
from run_config import parse_config, parse_float_list
from experiments import OUTPUT_ROOT, run_experiment
from reconstruction import SUPPORTED_ORDERS
from stability import DEFAULT_CA_GRID, cauchy_table, scan_alpha, stable_intervals

logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)

app = Flask(__name__)
CORS(app)

MAX_CONFIG_SIZE = 64 * 1024
SCAN_FIELDS = ('d', 'k_d', 'alpha_grid')

app.config['MAX_CONTENT_LENGTH'] = MAX_CONFIG_SIZE


def generate_transaction_id():
    return str(uuid.uuid4())[:8]


def error_response(message, transaction_id, status, issues=None):
    body = {'success': False, 'error': message, 'transaction_id': transaction_id}
    if issues:
        body['issues'] = [{'line': line, 'message': msg} for line, msg in issues]
    return jsonify(body), status


def _grid(value, default=None):
    """Accept a JSON list or the config-file list/range text"""
    if value is None:
        return default
    if isinstance(value, str):
        return parse_float_list(value)
    return tuple(float(v) for v in value)


INDEX_TEMPLATE = """
<!DOCTYPE html>
<html lang="en">
<head><meta charset="UTF-8"><title>SILW experiments</title></head>
<body>
<h1>SILW experiment server</h1>
<ul>
  <li><code>GET /api/health</code></li>
  <li><code>POST /api/run</code> with a run config as the request body</li>
  <li><code>POST /api/scan</code> with JSON {d, k_d, alpha_grid, C_a_grid, treatment, lambda}</li>
  <li><code>GET /api/cfl</code></li>
</ul>
</body>
</html>
"""


@app.route('/')
def index():
    return render_template_string(INDEX_TEMPLATE)


@app.route('/api/health', methods=['GET'])
def health_check():
    """Health check endpoint"""
    return jsonify({
        'status': 'healthy',
        'service': 'silw-experiments',
        'version': '1.0',
        'timestamp': time.time()
    })


@app.route('/api/run', methods=['POST'])
def run():
    """Run a config posted as text, or as the 'config' field of a JSON body"""
    start_time = time.time()
    transaction_id = generate_transaction_id()

    try:
        payload = request.get_json(silent=True)
        text = payload.get('config', '') if isinstance(payload, dict) else request.get_data(as_text=True)
        if not text.strip():
            return error_response('No config provided', transaction_id, 400)

        config = parse_config(text)
        out = os.path.join(OUTPUT_ROOT, f"api-{transaction_id}")
        code, manifest = run_experiment(config, out=out)
        processing_time = time.time() - start_time

        if code != EXIT_OK:
            status = 400 if code == EXIT_CONFIG else 500
            return error_response(manifest.get('error', 'experiment failed'), transaction_id, status)

        return jsonify({
            'success': True,
            'transaction_id': transaction_id,
            'processing_time_ms': round(processing_time * 1000, 2),
            'data': manifest
        })

    except ConfigError as e:
        logger.info(f"[{transaction_id}] rejected config: {e}")
        return error_response('invalid run config', transaction_id, 400, e.issues or [(0, str(e))])
    except SILWError as e:
        logger.error(f"[{transaction_id}] {type(e).__name__}: {e}")
        return error_response(str(e), transaction_id, http_status_for(e))
    except Exception as e:
        import traceback
        logger.error(f"Error running experiment: {e}")
        logger.error(traceback.format_exc())
        return error_response(str(e), transaction_id, 500)


@app.route('/api/scan', methods=['POST'])
def scan():
    """Eigenvalue scan; returns the per-alpha verdict and the stable intervals"""
    start_time = time.time()
    transaction_id = generate_transaction_id()

    params = request.get_json(silent=True)
    if not isinstance(params, dict):
        return error_response('Expected a JSON object', transaction_id, 400)
    missing = [k for k in SCAN_FIELDS if k not in params]
    if missing:
        return error_response(f"Missing fields: {', '.join(missing)}", transaction_id, 400)

    try:
        d, k_d = int(params['d']), int(params['k_d'])
        if d not in SUPPORTED_ORDERS or not 1 <= k_d <= d:
            raise ValueError(f"d={d}, k_d={k_d} not supported")
        lam = params.get('lambda')
        result = scan_alpha(d, k_d, params.get('treatment', 'new'),
                            _grid(params.get('C_a_grid'), DEFAULT_CA_GRID), _grid(params['alpha_grid']),
                            None if lam is None else float(lam))
    except (ValueError, TypeError) as e:
        return error_response(f"Bad parameter: {e}", transaction_id, 400)
    except SILWError as e:
        logger.error(f"[{transaction_id}] scan failed: {e}")
        return error_response(str(e), transaction_id, http_status_for(e))

    verdict = result.stable_for_all()
    return jsonify({
        'success': True,
        'transaction_id': transaction_id,
        'processing_time_ms': round((time.time() - start_time) * 1000, 2),
        'data': {
            'lambda': result.lam,
            'alpha': {f"{a:g}": bool(ok) for a, ok in verdict.items()},
            'stable_intervals': [[float(a), float(b)] for a, b in stable_intervals(result)],
        }
    })


@app.route('/api/cfl', methods=['GET'])
def cfl():
    table = cauchy_table()
    return jsonify({
        'success': True,
        'data': {str(int(row.d)): round(float(row.cfl_max), 4) for row in table.itertuples()}
    })


if __name__ == '__main__':
    port = int(os.environ.get('PORT', 5000))
    app.run(host='0.0.0.0', port=port, debug=os.environ.get('SILW_DEBUG') == '1')
