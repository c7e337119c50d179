import pytest

from server import app

SCAN_CONFIG = "[experiment]\nkind = stability-scan\n[scheme]\nd = 3\n[closure]\nk_d = 2\n" \
              "[stability]\nalpha_grid = 1.0\nC_a_grid = 0.5\n"


@pytest.fixture
def client(output_root):
    app.config['TESTING'] = True
    with app.test_client() as client:
        yield client


def test_health(client):
    response = client.get('/api/health')
    assert response.status_code == 200
    assert response.get_json()['status'] == 'healthy'


def test_index_lists_the_endpoints(client):
    assert b'/api/run' in client.get('/').data


def test_run_accepts_raw_config_text(client, output_root):
    response = client.post('/api/run', data=SCAN_CONFIG, content_type='text/plain')
    body = response.get_json()
    assert response.status_code == 200
    assert body['success'] is True
    assert body['data']['status'] == 'completed'
    assert (output_root / f"api-{body['transaction_id']}" / 'manifest.json').exists()


def test_run_accepts_json(client):
    response = client.post('/api/run', json={'config': SCAN_CONFIG})
    assert response.get_json()['data']['stable_intervals'] == [[1.0, 1.0]]


def test_invalid_config_reports_issues(client):
    response = client.post('/api/run', data="[experiment]\nkind = nothing\n", content_type='text/plain')
    body = response.get_json()
    assert response.status_code == 400
    assert body['success'] is False
    assert {'line': 0, 'message': 'missing required keys: d, k_d'} in body['issues']


def test_empty_run_request(client):
    response = client.post('/api/run', data='', content_type='text/plain')
    assert response.status_code == 400
    assert response.get_json()['error'] == 'No config provided'


def test_scan_endpoint(client):
    response = client.post('/api/scan', json={'d': 3, 'k_d': 2, 'alpha_grid': '0.9:1.0:0.1', 'C_a_grid': [0.5]})
    body = response.get_json()
    assert response.status_code == 200
    assert body['data']['alpha'] == {'0.9': True, '1': True}
    assert body['data']['stable_intervals'] == [[0.9, 1.0]]


@pytest.mark.parametrize("payload", [
    {'d': 3, 'k_d': 2},
    {'d': 4, 'k_d': 2, 'alpha_grid': [1.0]},
    {'d': 3, 'k_d': 2, 'alpha_grid': 'soon'},
])
def test_scan_rejects_bad_requests(client, payload):
    response = client.post('/api/scan', json=payload)
    assert response.status_code == 400
    assert response.get_json()['success'] is False


def test_cfl_table(client):
    data = client.get('/api/cfl').get_json()['data']
    assert set(data) == {'3', '5', '7', '9', '11', '13'}
    assert abs(data['3'] - 1.62) <= 0.01
