import { DraftApi } from './api.js';
import { DraftApp } from './app.js';

const params = new URLSearchParams(window.location.search);
const base =
  params.get('api') ?? (window as any).FRCSTRENGTH_API ?? 'http://127.0.0.1:8321';

const root = document.getElementById('app');
if (!root) {
  throw new Error('missing #app container');
}
const app = new DraftApp(root, new DraftApi(base));
void app.start();
